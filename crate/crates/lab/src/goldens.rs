//! Golden constants file: `key=value` lines holding the reference values of
//! the ground state. Regenerated only on explicit request.

use std::fmt;
use std::path::{Path, PathBuf};

use blowuplab_core::groundstate::oracle::{reference_values, OracleValues};

pub const KEYS: [&str; 7] = ["q0", "mass", "variance", "quartic", "r2_quartic", "r2q_rho", "rho_q"];

#[derive(Debug, Clone, PartialEq)]
pub struct Goldens {
    /// Values in the order of [`KEYS`].
    pub values: [f64; 7],
}

impl Goldens {
    pub fn get(&self, key: &str) -> Option<f64> {
        KEYS.iter().position(|k| *k == key).map(|i| self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        KEYS.iter().copied().zip(self.values.iter().copied())
    }
}

impl From<&OracleValues> for Goldens {
    fn from(o: &OracleValues) -> Self {
        let mut values = [0.0; 7];
        for (i, (k, v)) in o.entries().iter().enumerate() {
            debug_assert_eq!(*k, KEYS[i]);
            values[i] = *v;
        }
        Self { values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoldenError {
    Missing(PathBuf),
    Unreadable(PathBuf, String),
    /// A line that is not `key=value` or names an unknown key.
    BadLine { line: usize, text: String },
    BadValue { key: String, text: String },
    MissingKey(&'static str),
    DuplicateKey(String),
}

impl GoldenError {
    /// The key the error is about, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            GoldenError::BadValue { key, .. } | GoldenError::DuplicateKey(key) => Some(key),
            GoldenError::MissingKey(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for GoldenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoldenError::Missing(p) => write!(
                f,
                "goldens file {} not found; create it with `blowuplab regen-goldens`",
                p.display()
            ),
            GoldenError::Unreadable(p, e) => write!(f, "cannot read goldens file {}: {e}", p.display()),
            GoldenError::BadLine { line, text } => {
                write!(f, "goldens line {line} is not a known key=value pair: {text:?}")
            }
            GoldenError::BadValue { key, text } => write!(f, "golden key {key}: bad value {text:?}"),
            GoldenError::MissingKey(k) => write!(f, "golden key {k}: missing"),
            GoldenError::DuplicateKey(k) => write!(f, "golden key {k}: given twice"),
        }
    }
}

impl std::error::Error for GoldenError {}

pub fn render(g: &Goldens) -> String {
    let mut s = String::from("# Ground-state reference values (shooting with Richardson extrapolation).\n");
    s.push_str("# Regenerate with `blowuplab regen-goldens`.\n");
    for (k, v) in g.entries() {
        // Debug formatting is the shortest representation that round-trips.
        s.push_str(&format!("{k}={v:?}\n"));
    }
    s
}

pub fn parse(text: &str) -> Result<Goldens, GoldenError> {
    let mut found: [Option<f64>; 7] = [None; 7];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad_line = || GoldenError::BadLine { line: n + 1, text: raw.to_string() };
        let (key, value) = line.split_once('=').ok_or_else(bad_line)?;
        let key = key.trim();
        let i = KEYS.iter().position(|k| *k == key).ok_or_else(bad_line)?;
        let v: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| GoldenError::BadValue { key: key.to_string(), text: value.trim().to_string() })?;
        if found[i].replace(v).is_some() {
            return Err(GoldenError::DuplicateKey(key.to_string()));
        }
    }
    let mut values = [0.0; 7];
    for (i, v) in found.iter().enumerate() {
        values[i] = v.ok_or(GoldenError::MissingKey(KEYS[i]))?;
    }
    Ok(Goldens { values })
}

pub fn load(path: &Path) -> Result<Goldens, GoldenError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => GoldenError::Missing(path.to_path_buf()),
        _ => GoldenError::Unreadable(path.to_path_buf(), e.to_string()),
    })?;
    parse(&text)
}

/// Recomputes the reference values and writes them to `path`.
pub fn regenerate(path: &Path) -> std::io::Result<Goldens> {
    let g = Goldens::from(&reference_values());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, render(&g))?;
    Ok(g)
}
