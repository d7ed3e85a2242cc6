//! JSON run configuration with itemized validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use blowuplab_core::nlssim::{Direction, Scheme, SimConfig};
use blowuplab_core::numerics::CartesianGrid;
use blowuplab_core::profile::{CoefficientK, KFamily};
use serde_json::Value;

/// Keys a config may carry; the first block is required.
const REQUIRED: [&str; 12] = [
    "grid.L",
    "grid.m",
    "k.family",
    "k.k1",
    "k.k2",
    "time.t0",
    "time.t_end",
    "time.dt",
    "direction",
    "decompose.stride",
    "decompose.tol",
    "output.csv_path",
];
const OPTIONAL: [&str; 10] = [
    "k.rough_modulus",
    "output.fields_dir",
    "c0",
    "scheme",
    "delta",
    "collapse_floor",
    "lyapunov.A",
    "lyapunov.delta0",
    "snapshot_stride",
    "bootstrap_c",
];

/// Every problem found in a config, one message per item.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid config ({} problem(s)):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub csv_path: PathBuf,
    pub fields_dir: Option<PathBuf>,
    /// Bound on the fitted modulation constant.
    pub modulation_c: f64,
}

impl RunConfig {
    /// Serializes back to the JSON schema accepted by [`parse_config`].
    pub fn to_json(&self) -> Value {
        let s = &self.sim;
        let family = if s.k.is_homogeneous() { "homogeneous" } else { s.k.family.name() };
        let mut v = serde_json::json!({
            "grid": {"L": s.grid.half_width(), "m": s.grid.m()},
            "k": {"family": family, "k1": s.k.k1, "k2": s.k.k2},
            "time": {"t0": s.t0, "t_end": s.t_end, "dt": s.dt},
            "direction": s.direction.name(),
            "decompose": {"stride": s.decompose_stride, "tol": s.newton_tol},
            "output": {"csv_path": self.csv_path.to_string_lossy()},
            "c0": s.c0,
            "scheme": s.scheme.name(),
            "delta": s.delta,
            "collapse_floor": s.collapse_floor,
            "lyapunov": {"A": s.lyapunov_a, "delta0": s.lyapunov_delta0},
            "snapshot_stride": s.snapshot_stride,
            "bootstrap_c": self.modulation_c,
        });
        if s.k.family == KFamily::RoughC2 {
            v["k"]["rough_modulus"] = s.k.rough_modulus.into();
        }
        if let Some(d) = &self.fields_dir {
            v["output"]["fields_dir"] = d.to_string_lossy().into();
        }
        v
    }
}

struct Reader<'a> {
    root: &'a Value,
    errs: Vec<String>,
}

impl<'a> Reader<'a> {
    fn get(&self, path: &str) -> Option<&'a Value> {
        let mut v = self.root;
        for part in path.split('.') {
            v = v.get(part)?;
        }
        (!v.is_null()).then_some(v)
    }

    fn f64_opt(&mut self, path: &str) -> Option<f64> {
        let v = self.get(path)?;
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.errs.push(format!("{path}: expected a finite number, got {v}"));
                None
            }
        }
    }

    fn f64_req(&mut self, path: &str) -> Option<f64> {
        if self.get(path).is_none() {
            self.errs.push(format!("{path}: missing"));
            return None;
        }
        self.f64_opt(path)
    }

    fn usize_opt(&mut self, path: &str) -> Option<usize> {
        let v = self.get(path)?;
        match v.as_u64() {
            Some(x) => Some(x as usize),
            None => {
                self.errs.push(format!("{path}: expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn usize_req(&mut self, path: &str) -> Option<usize> {
        if self.get(path).is_none() {
            self.errs.push(format!("{path}: missing"));
            return None;
        }
        self.usize_opt(path)
    }

    fn str_opt(&mut self, path: &str) -> Option<&'a str> {
        let v = self.get(path)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.errs.push(format!("{path}: expected a string, got {v}"));
                None
            }
        }
    }

    fn str_req(&mut self, path: &str) -> Option<&'a str> {
        if self.get(path).is_none() {
            self.errs.push(format!("{path}: missing"));
            return None;
        }
        self.str_opt(path)
    }
}

fn leaf_paths(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v.as_object() {
        Some(map) => {
            for (k, child) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                leaf_paths(child, &p, out);
            }
        }
        None => out.push(prefix.to_string()),
    }
}

/// Parses and validates a config, collecting every problem.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError(vec![format!("not valid JSON: {e}")]))?;
    if !root.is_object() {
        return Err(ConfigError(vec!["top level must be a JSON object".into()]));
    }
    let known: BTreeSet<&str> = REQUIRED.iter().chain(OPTIONAL.iter()).copied().collect();
    let mut leaves = Vec::new();
    leaf_paths(&root, "", &mut leaves);
    let mut r = Reader { root: &root, errs: Vec::new() };
    for p in &leaves {
        if !known.contains(p.as_str()) {
            r.errs.push(format!("{p}: unknown key"));
        }
    }

    let half_width = r.f64_req("grid.L");
    let m = r.usize_req("grid.m");
    let family = r.str_req("k.family");
    let k1 = r.f64_req("k.k1");
    let k2 = r.f64_req("k.k2");
    let rough = r.f64_opt("k.rough_modulus");
    let t0 = r.f64_req("time.t0");
    let t_end = r.f64_req("time.t_end");
    let dt = r.f64_req("time.dt");
    let direction = r.str_req("direction");
    let stride = r.usize_req("decompose.stride");
    let tol = r.f64_req("decompose.tol");
    let csv_path = r.str_req("output.csv_path");
    let fields_dir = r.str_opt("output.fields_dir");
    let c0 = r.f64_opt("c0");
    let scheme = r.str_opt("scheme");
    let delta = r.f64_opt("delta");
    let floor = r.f64_opt("collapse_floor");
    let a = r.f64_opt("lyapunov.A");
    let delta0 = r.f64_opt("lyapunov.delta0");
    let snapshot_stride = r.usize_opt("snapshot_stride");
    let modulation_c = r.f64_opt("bootstrap_c").unwrap_or(10.0);
    let mut errs = r.errs;

    let grid = match (half_width, m) {
        (Some(l), Some(m)) => match CartesianGrid::new(l, m) {
            Ok(g) => Some(g),
            Err(e) => {
                errs.push(format!("grid: {e}"));
                None
            }
        },
        _ => None,
    };
    let k = match (family, k1, k2) {
        (Some("homogeneous"), ..) => {
            if k1.unwrap_or(0.0) != 0.0 || k2.unwrap_or(0.0) != 0.0 {
                errs.push("k: the homogeneous family needs k1 = k2 = 0".into());
            }
            Some(CoefficientK::homogeneous())
        }
        (Some(name), Some(k1), Some(k2)) => match KFamily::parse(name) {
            Some(f) => match CoefficientK::new(f, k1, k2, rough) {
                Ok(k) => Some(k),
                Err(e) => {
                    errs.push(format!("k: {e}"));
                    None
                }
            },
            None => {
                errs.push(format!(
                    "k.family: unknown family {name:?}; expected homogeneous, quadratic_gaussian, \
                     pure_quadratic_capped or rough_c2"
                ));
                None
            }
        },
        _ => None,
    };
    let direction = direction.and_then(|d| {
        let parsed = Direction::parse(d);
        if parsed.is_none() {
            errs.push(format!("direction: expected forward or backward, got {d:?}"));
        }
        parsed
    });
    let scheme = match scheme {
        Some(s) => {
            let parsed = Scheme::parse(s);
            if parsed.is_none() {
                errs.push(format!("scheme: expected strang or triple_jump, got {s:?}"));
            }
            parsed
        }
        None => Some(Scheme::default()),
    };
    if let Some(p) = csv_path {
        if p.is_empty() {
            errs.push("output.csv_path: must not be empty".into());
        }
    }
    if !(modulation_c > 0.0) {
        errs.push(format!("bootstrap_c: must be positive, got {modulation_c}"));
    }

    let (Some(grid), Some(k), Some(t0), Some(t_end), Some(dt), Some(direction), Some(stride), Some(tol), Some(scheme), Some(csv)) =
        (grid, k, t0, t_end, dt, direction, stride, tol, scheme, csv_path)
    else {
        return Err(ConfigError(errs));
    };
    let mut sim = SimConfig::new(grid, k, t0);
    sim.t_end = t_end;
    sim.dt = dt;
    sim.direction = direction;
    sim.scheme = scheme;
    sim.decompose_stride = stride;
    sim.newton_tol = tol;
    if let Some(v) = c0 {
        sim.c0 = v;
    }
    if let Some(v) = delta {
        sim.delta = v;
    }
    if let Some(v) = floor {
        sim.collapse_floor = v;
    }
    if let Some(v) = a {
        sim.lyapunov_a = v;
    }
    if let Some(v) = delta0 {
        sim.lyapunov_delta0 = v;
    }
    sim.snapshot_stride = match (snapshot_stride, fields_dir) {
        (Some(s), _) => s,
        (None, Some(_)) => 10,
        (None, None) => 0,
    };
    if let Err(e) = sim.validate() {
        let msg = e.to_string();
        let body = msg.split_once(": ").map_or(msg.as_str(), |(_, b)| b);
        errs.extend(body.split("; ").map(|s| s.to_string()));
    }
    if !errs.is_empty() {
        return Err(ConfigError(errs));
    }
    Ok(RunConfig {
        sim,
        csv_path: PathBuf::from(csv),
        fields_dir: fields_dir.map(PathBuf::from),
        modulation_c,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config(&text)
}

/// The template for a different `t0`: box, step and end time scaled with
/// `λ0` so the resolution of the profile and the step in `s` are unchanged.
pub fn rescale_t0(c: &RunConfig, t0: f64) -> Result<RunConfig, ConfigError> {
    let f = t0 / c.sim.t0;
    if !(f > 0.0 && f.is_finite()) {
        return Err(ConfigError(vec![format!("t0 = {t0} must be negative")]));
    }
    let mut out = c.clone();
    out.sim.t0 = t0;
    out.sim.t_end = c.sim.t_end * f;
    out.sim.dt = c.sim.dt * f * f;
    out.sim.grid = CartesianGrid::new(c.sim.grid.half_width() * f, c.sim.grid.m())
        .map_err(|e| ConfigError(vec![format!("grid: {e}")]))?;
    out.sim.validate().map_err(|e| ConfigError(vec![e.to_string()]))?;
    Ok(out)
}

/// The template with `k1` replaced.
pub fn with_k1(c: &RunConfig, k1: f64) -> Result<RunConfig, ConfigError> {
    let k = &c.sim.k;
    let mut out = c.clone();
    out.sim.k = CoefficientK::new(k.family, k1, k.k2, Some(k.rough_modulus))
        .map_err(|e| ConfigError(vec![format!("k: {e}")]))?;
    Ok(out)
}
