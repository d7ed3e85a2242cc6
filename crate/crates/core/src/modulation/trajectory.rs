use std::io::{self, Write};

use crate::profile::ModParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub s: f64,
    pub params: ModParams,
    /// Values in the order of [`Trajectory::columns`].
    pub diagnostics: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryStatus {
    #[default]
    Completed,
    /// `λ` fell below the collapse threshold.
    CollapseReached,
    /// A decomposition failed; the trajectory ends at the last good sample.
    DecompositionFailed,
}

/// Time-ordered modulation samples with named diagnostic columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub columns: Vec<String>,
    pub samples: Vec<Sample>,
    pub status: TrajectoryStatus,
}

pub const BASE_COLUMNS: [&str; 9] = [
    "t", "s", "lambda", "b", "alpha1", "alpha2", "beta1", "beta2", "gamma",
];

impl Trajectory {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            samples: Vec::new(),
            status: TrajectoryStatus::Completed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends a sample; `t` must keep moving in the direction set by the
    /// first two samples.
    pub fn push(&mut self, t: f64, s: f64, params: ModParams, diagnostics: Vec<f64>) -> Result<()> {
        if diagnostics.len() != self.columns.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} diagnostics for {} columns",
                diagnostics.len(),
                self.columns.len()
            )));
        }
        if let Some(last) = self.samples.last() {
            let monotone = match self.samples.len() {
                1 => t != last.t,
                n => (t - last.t) * (last.t - self.samples[n - 2].t) > 0.0,
            };
            if !monotone {
                return Err(Error::InvalidTrajectory(format!(
                    "t = {t} breaks monotonicity after {}",
                    last.t
                )));
            }
        }
        self.samples.push(Sample {
            t,
            s,
            params,
            diagnostics,
        });
        Ok(())
    }

    /// Values of a diagnostic column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.samples.iter().map(|s| s.diagnostics[i]).collect())
    }

    /// Adds a diagnostic column, one value per sample.
    pub fn add_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.samples.len() {
            return Err(Error::InvalidTrajectory(format!(
                "column {name} has {} values for {} samples",
                values.len(),
                self.samples.len()
            )));
        }
        self.columns.push(name.to_string());
        for (s, v) in self.samples.iter_mut().zip(values) {
            s.diagnostics.push(v);
        }
        Ok(())
    }

    /// Largest relative gap between the stored `s` and the trapezoid
    /// integral of `1/λ²` in `t`.
    pub fn time_consistency(&self) -> Result<f64> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidTrajectory("need at least two samples".into()));
        }
        let first = &self.samples[0];
        let mut s = first.s;
        let mut worst = 0.0f64;
        for w in self.samples.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let f = |p: &ModParams| 1.0 / (p.lambda * p.lambda);
            s += 0.5 * (b.t - a.t) * (f(&a.params) + f(&b.params));
            let span = (b.s - first.s).abs().max(f64::MIN_POSITIVE);
            worst = worst.max((s - b.s).abs() / span);
        }
        Ok(worst)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
        header.extend(self.columns.iter().map(|c| c.as_str()));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let p = &s.params;
            let mut row = vec![
                s.t,
                s.s,
                p.lambda,
                p.b,
                p.alpha[0],
                p.alpha[1],
                p.beta[0],
                p.beta[1],
                p.gamma,
            ];
            row.extend(&s.diagnostics);
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
