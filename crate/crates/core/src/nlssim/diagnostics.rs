use crate::modulation::{StructureConstants, Trajectory};
use crate::numerics::{derivative_nonuniform, Field2D};
use crate::profile::{CoefficientK, ModParams};
use crate::{Error, Result};

/// Mass, energy and variance of a field on the physical grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    /// `∫|u|²`
    pub mass: f64,
    /// `E_in(u) = ½∫|∇u|² - ¼∫k|u|⁴`
    pub energy: f64,
    /// `∫|x|²|u|²`
    pub variance: f64,
}

pub fn conserved(u: &Field2D, k: &CoefficientK) -> Conserved {
    let [g1, g2] = u.gradient();
    let m = u.m();
    let (mut mass, mut grad, mut quartic, mut var) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let x = u.grid.point(i, j);
            let idx = i * m + j;
            let a = u.values[idx].norm_sqr();
            mass += a;
            grad += g1.values[idx].norm_sqr() + g2.values[idx].norm_sqr();
            quartic += k.eval(x) * a * a;
            var += (x[0] * x[0] + x[1] * x[1]) * a;
        }
    }
    let da = u.grid.cell_area();
    Conserved {
        mass: mass * da,
        energy: (0.5 * grad - 0.25 * quartic) * da,
        variance: var * da,
    }
}

/// Second derivative of `V` at the middle of three samples `(t, V)`, exact for
/// quadratics on an uneven mesh.
pub fn second_difference(s: [(f64, f64); 3]) -> f64 {
    let [(ta, va), (tb, vb), (tc, vc)] = s;
    2.0 * (va / ((ta - tb) * (ta - tc)) + vb / ((tb - ta) * (tb - tc)) + vc / ((tc - ta) * (tc - tb)))
}

/// `M`, `E_in`, `V` of `u`, and when two earlier `(t, V)` samples are given,
/// `V''` at the previous sample and `V'' - 16 E_in`. The identity
/// `V'' = 16E` holds for constant `k` only.
pub fn conserved_and_virial(
    u: &Field2D,
    t: f64,
    k: &CoefficientK,
    prev: &[(f64, f64)],
) -> Vec<(&'static str, f64)> {
    let c = conserved(u, k);
    let mut out = vec![("mass", c.mass), ("energy", c.energy), ("variance", c.variance)];
    if prev.len() >= 2 {
        let n = prev.len();
        let v2 = second_difference([prev[n - 2], prev[n - 1], (t, c.variance)]);
        out.push(("virial_second_difference", v2));
        out.push(("virial_defect", v2 - 16.0 * c.energy));
    }
    out
}

/// Cutoff `χ(z)`: `0` for `|z| ≤ 1`, `1` for `|z| ≥ 2`, smooth in between.
pub fn chi(z: [f64; 2]) -> f64 {
    let s = z[0].hypot(z[1]) - 1.0;
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let f = |x: f64| (-1.0 / x).exp();
    f(s) / (f(s) + f(1.0 - s))
}

/// `∫χ(x/R)|u|²`, the mass outside the ball of radius `R`.
pub fn local_mass(u: &Field2D, r: f64) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("R must be at least 1, got {r}")));
    }
    Ok(mass_outside(u, r))
}

/// `∫χ(x/r)|u|²` for any `r > 0`.
pub(crate) fn mass_outside(u: &Field2D, r: f64) -> f64 {
    let m = u.m();
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            let x = u.grid.point(i, j);
            s += chi([x[0] / r, x[1] / r]) * u.values[i * m + j].norm_sqr();
        }
    }
    s * u.grid.cell_area()
}

/// The four bootstrap hypotheses at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapFlags {
    /// `‖ε‖_{H¹} ≤ λ`
    pub eps: bool,
    /// `|β|/λ + |α|/λ ≤ δ`
    pub momentum: bool,
    /// `|λ + t/C0| ≤ δλ`
    pub lambda: bool,
    /// `|b/λ - 1/C0| ≤ δ`
    pub b: bool,
}

impl BootstrapFlags {
    pub fn evaluate(t: f64, p: &ModParams, eps_h1: f64, c0: f64, delta: f64) -> Self {
        let l = p.lambda;
        let mom = (p.beta[0].hypot(p.beta[1]) + p.alpha[0].hypot(p.alpha[1])) / l;
        Self {
            eps: eps_h1 <= l,
            momentum: mom <= delta,
            lambda: (l + t / c0).abs() <= delta * l,
            b: (p.b / l - 1.0 / c0).abs() <= delta,
        }
    }

    pub fn all(&self) -> bool {
        self.eps && self.momentum && self.lambda && self.b
    }
}

/// Residuals of the modulation equations along a trajectory against the
/// envelope `‖ε‖²_{H¹} + |P|²‖ε‖_{H¹} + |P|³`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationReport {
    pub s: Vec<f64>,
    /// Per sample: `|λ_s/λ + b|`, `|b_s + b² - d0(α,α)|`, `|α_s/λ - 2β|`,
    /// `|β_s + bβ - c0(α)λ|`, `|γ_s - 1 - |β|² + d1(α,α)|`.
    pub residuals: Vec<[f64; 5]>,
    pub envelope: Vec<f64>,
    /// Smallest `C` with every residual below `C` times the envelope.
    pub fitted_c: f64,
    pub c_bound: f64,
    pub pass: bool,
}

pub const MODULATION_LABELS: [&str; 5] = ["lambda", "b", "alpha", "beta", "gamma"];

/// Differentiates the trajectory in `s` and compares the modulation
/// equations with their envelope. Interior samples only.
pub fn modulation_residuals(
    traj: &Trajectory,
    sc: &StructureConstants,
    c_bound: f64,
) -> Result<ModulationReport> {
    let n = traj.len();
    if n < 5 {
        return Err(Error::InvalidTrajectory(format!(
            "modulation residuals need at least 5 samples, got {n}"
        )));
    }
    let s: Vec<f64> = traj.samples.iter().map(|x| x.s).collect();
    if s.windows(2).any(|w| w[1] == w[0]) {
        return Err(Error::InvalidTrajectory("repeated s values".into()));
    }
    let get = |f: &dyn Fn(&ModParams) -> f64| -> Vec<f64> {
        traj.samples.iter().map(|x| f(&x.params)).collect()
    };
    let d = |f: &dyn Fn(&ModParams) -> f64| derivative_nonuniform(&s, &get(f));
    let dl = d(&|p| p.lambda);
    let db = d(&|p| p.b);
    let da = [d(&|p| p.alpha[0]), d(&|p| p.alpha[1])];
    let dbeta = [d(&|p| p.beta[0]), d(&|p| p.beta[1])];
    let dg = d(&|p| p.gamma);
    let eps = traj.column("eps_h1");
    let mut residuals = Vec::new();
    let mut envelope = Vec::new();
    let mut fitted_c = 0.0f64;
    let mut s_out = Vec::new();
    for i in 1..n - 1 {
        let p = &traj.samples[i].params;
        let c0 = sc.c0_of(p.alpha);
        let beta2 = p.beta[0] * p.beta[0] + p.beta[1] * p.beta[1];
        let r = [
            (dl[i] / p.lambda + p.b).abs(),
            (db[i] + p.b * p.b - sc.d0(p.alpha)).abs(),
            (da[0][i] / p.lambda - 2.0 * p.beta[0]).hypot(da[1][i] / p.lambda - 2.0 * p.beta[1]),
            (dbeta[0][i] + p.b * p.beta[0] - c0[0] * p.lambda)
                .hypot(dbeta[1][i] + p.b * p.beta[1] - c0[1] * p.lambda),
            (dg[i] - 1.0 - beta2 + sc.d1(p.alpha)).abs(),
        ];
        let e = eps.as_ref().map_or(0.0, |c| c[i]);
        let ps = p.size();
        let env = e * e + ps * ps * e + ps.powi(3);
        for v in r {
            fitted_c = fitted_c.max(v / env);
        }
        residuals.push(r);
        envelope.push(env);
        s_out.push(s[i]);
    }
    Ok(ModulationReport {
        s: s_out,
        residuals,
        envelope,
        fitted_c,
        c_bound,
        pass: fitted_c <= c_bound,
    })
}

/// Least-squares line `λ ≈ a + c t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `-slope · C0`, equal to one for the law `λ = -t/C0`.
    pub normalized_rate: f64,
}

pub fn rate_fit(traj: &Trajectory, c0: f64) -> Result<RateFit> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::InvalidTrajectory("rate fit needs two samples".into()));
    }
    let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let l: Vec<f64> = traj.samples.iter().map(|s| s.params.lambda).collect();
    let nf = n as f64;
    let (mt, ml) = (t.iter().sum::<f64>() / nf, l.iter().sum::<f64>() / nf);
    let sxy: f64 = t.iter().zip(&l).map(|(a, b)| (a - mt) * (b - ml)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: ml - slope * mt,
        normalized_rate: -slope * c0,
    })
}
