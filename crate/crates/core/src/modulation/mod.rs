//! Formal modulation dynamics: structure constants, the formal ODE system for
//! `(λ, b, α, β, γ)`, the linear `(α₁, β₁)` system and the ODE lemma check.

mod trajectory;

use num_complex::Complex64;

use crate::groundstate::Moments;
use crate::profile::{CoefficientK, ModParams};
use crate::{Error, Result};

pub use trajectory::{Sample, Trajectory, TrajectoryStatus};

/// Constants of the formal system.
///
/// `d0(α, α) = αᵀ d0_matrix α`, `d1(α, α) = d1_scale · d0(α, α)` and
/// `c0(α) = c0_matrix α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    pub c0: f64,
    pub e0_tilde: f64,
    pub d0_matrix: [[f64; 2]; 2],
    pub d1_scale: f64,
    pub c0_matrix: [[f64; 2]; 2],
    /// `‖yQ‖₂²`, kept to relate `C0` and `Ẽ0`.
    pub variance: f64,
}

impl StructureConstants {
    /// Constants with a prescribed `C0`; `Ẽ0` follows from its definition.
    pub fn with_c0(moments: &Moments, k: &CoefficientK, c0: f64) -> Result<Self> {
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("C0 must be positive, got {c0}")));
        }
        let e0 = moments.variance / (8.0 * c0 * c0);
        Self::from_e0(moments, k, e0)
    }

    fn from_e0(moments: &Moments, k: &CoefficientK, e0_tilde: f64) -> Result<Self> {
        if !(e0_tilde.is_finite() && e0_tilde > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "energy shift violated: Ẽ0 = {e0_tilde:e} must be positive"
            )));
        }
        let h = k.hessian_at_origin();
        let d = 2.0 * moments.mass / moments.variance;
        let kappa0 = moments.kappa0();
        let scale = |s: f64| [[s * h[0][0], s * h[0][1]], [s * h[1][0], s * h[1][1]]];
        let (rq_rho, rho_q) = moments.rho_pairings;
        Ok(Self {
            c0: (moments.variance / (8.0 * e0_tilde)).sqrt(),
            e0_tilde,
            d0_matrix: scale(d),
            d1_scale: rq_rho / (4.0 * rho_q),
            c0_matrix: scale(kappa0),
            variance: moments.variance,
        })
    }

    pub fn d0(&self, a: [f64; 2]) -> f64 {
        quad(&self.d0_matrix, a)
    }

    pub fn d1(&self, a: [f64; 2]) -> f64 {
        self.d1_scale * self.d0(a)
    }

    pub fn c0_of(&self, a: [f64; 2]) -> [f64; 2] {
        let m = &self.c0_matrix;
        [m[0][0] * a[0] + m[0][1] * a[1], m[1][0] * a[0] + m[1][1] * a[1]]
    }
}

fn quad(m: &[[f64; 2]; 2], a: [f64; 2]) -> f64 {
    a[0] * (m[0][0] * a[0] + m[0][1] * a[1]) + a[1] * (m[1][0] * a[0] + m[1][1] * a[1])
}

/// `(1/8) ∫ ∇²k(0)(y, y) Q⁴`.
pub fn energy_shift(moments: &Moments, k: &CoefficientK) -> f64 {
    let t = moments.quartic_tensor;
    -(k.k1 * t[0][0] + k.k2 * t[1][1]) / 8.0
}

/// Structure constants from the initial energy `E_in(u0)`:
/// `Ẽ0 = E_in(u0) + (1/8)∫∇²k(0)(y,y)Q⁴` and `C0 = ‖yQ‖₂ / √(8 Ẽ0)`.
pub fn derive_structure_constants(
    moments: &Moments,
    k: &CoefficientK,
    initial: &ModParams,
    e_in: f64,
) -> Result<StructureConstants> {
    if !(initial.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial λ must be positive, got {}",
            initial.lambda
        )));
    }
    StructureConstants::from_e0(moments, k, e_in + energy_shift(moments, k))
}

/// `E_in` of the ansatz with `ε = 0` from the second-order expansion of
/// `Ẽ(Q_P)`, divided by `k(α) λ²`.
pub fn expanded_energy_in(moments: &Moments, k: &CoefficientK, p: &ModParams) -> f64 {
    let beta2 = p.beta[0] * p.beta[0] + p.beta[1] * p.beta[1];
    let kinetic = p.b * p.b / 8.0 * moments.variance + 0.5 * beta2 * moments.mass;
    (kinetic / (p.lambda * p.lambda) - energy_shift(moments, k)) / k.eval(p.alpha)
}

/// Which law drives the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseLaw {
    /// `γ_s = 1 + |β|² - d1(α, α)`
    #[default]
    Corrected,
    /// `γ_s = 1 + |β|²`
    Bare,
}

/// Derivative in `s` of the modulation vector, in the layout of [`ModParams`].
pub fn formal_rhs(p: &ModParams, sc: &StructureConstants, law: PhaseLaw) -> Result<ModParams> {
    if !(p.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "λ must be positive, got {}",
            p.lambda
        )));
    }
    let c0 = sc.c0_of(p.alpha);
    let beta2 = p.beta[0] * p.beta[0] + p.beta[1] * p.beta[1];
    let gamma_s = match law {
        PhaseLaw::Corrected => 1.0 + beta2 - sc.d1(p.alpha),
        PhaseLaw::Bare => 1.0 + beta2,
    };
    Ok(ModParams {
        lambda: -p.b * p.lambda,
        b: -p.b * p.b + sc.d0(p.alpha),
        alpha: [2.0 * p.beta[0] * p.lambda, 2.0 * p.beta[1] * p.lambda],
        beta: [
            -p.b * p.beta[0] + c0[0] * p.lambda,
            -p.b * p.beta[1] + c0[1] * p.lambda,
        ],
        gamma: gamma_s,
    })
}

/// Initial data of the construction: `λ0 = -t0/C0`, `b0 = -t0/C0²`,
/// `α0 = β0 = 0`, `γ0 = -C0²/t0`.
pub fn initial_params(c0: f64, t0: f64) -> Result<ModParams> {
    if !(t0 < 0.0 && c0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t0 < 0 and C0 > 0, got t0 = {t0}, C0 = {c0}"
        )));
    }
    Ok(ModParams::new(-t0 / c0, -t0 / (c0 * c0), [0.0; 2], [0.0; 2], -c0 * c0 / t0))
}

/// Smallest λ before an integration reports collapse.
pub const COLLAPSE_LAMBDA: f64 = 1e-6;

const STATE: usize = 8;

fn pack(p: &ModParams, s: f64) -> [f64; STATE] {
    [p.lambda, p.b, p.alpha[0], p.alpha[1], p.beta[0], p.beta[1], p.gamma, s]
}

fn unpack(y: &[f64; STATE]) -> (ModParams, f64) {
    (
        ModParams::new(y[0], y[1], [y[2], y[3]], [y[4], y[5]], y[6]),
        y[7],
    )
}

/// `d/dt` of `(λ, b, α, β, γ, s)`.
fn rhs_t(y: &[f64; STATE], sc: &StructureConstants, law: PhaseLaw) -> Result<[f64; STATE]> {
    let (p, _) = unpack(y);
    let d = formal_rhs(&p, sc, law)?;
    let w = 1.0 / (p.lambda * p.lambda);
    let mut out = pack(&d, 1.0);
    out.iter_mut().for_each(|v| *v *= w);
    Ok(out)
}

fn rk4(
    y: &[f64; STATE],
    h: f64,
    sc: &StructureConstants,
    law: PhaseLaw,
) -> Result<[f64; STATE]> {
    let add = |a: &[f64; STATE], k: &[f64; STATE], c: f64| {
        let mut o = *a;
        o.iter_mut().zip(k).for_each(|(x, d)| *x += c * d);
        o
    };
    let k1 = rhs_t(y, sc, law)?;
    let k2 = rhs_t(&add(y, &k1, 0.5 * h), sc, law)?;
    let k3 = rhs_t(&add(y, &k2, 0.5 * h), sc, law)?;
    let k4 = rhs_t(&add(y, &k3, h), sc, law)?;
    let mut o = *y;
    for i in 0..STATE {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(o)
}

/// Integrates the formal system in `t` from `t0` to `t_end` with RK4.
///
/// The step is `dt · λ/λ0`, so it follows the collapse scale; integration
/// stops once `λ < 1e-6`. The run is backward when `t_end < t0`.
pub fn integrate_formal(
    p0: &ModParams,
    sc: &StructureConstants,
    t0: f64,
    t_end: f64,
    dt: f64,
    law: PhaseLaw,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t0 < 0.0 && t_end <= 0.0 && t_end != t0) {
        return Err(Error::InvalidParameter(format!(
            "need t0 < 0, t_end ≤ 0, t_end ≠ t0; got t0 = {t0}, t_end = {t_end}"
        )));
    }
    formal_rhs(p0, sc, law)?;
    let dir = (t_end - t0).signum();
    let lambda0 = p0.lambda;
    let mut traj = Trajectory::new(vec![
        "lambda_plus_t_over_c0".into(),
        "b_over_lambda_minus_inv_c0".into(),
    ]);
    let diag = |t: f64, p: &ModParams| vec![p.lambda + t / sc.c0, p.b / p.lambda - 1.0 / sc.c0];
    let mut y = pack(p0, 0.0);
    let mut t = t0;
    traj.push(t, 0.0, *p0, diag(t, p0))?;
    loop {
        let (p, _) = unpack(&y);
        if p.lambda < COLLAPSE_LAMBDA {
            traj.status = TrajectoryStatus::CollapseReached;
            break;
        }
        let remaining = (t_end - t).abs();
        if remaining <= 1e-15 * t0.abs() {
            break;
        }
        let h = (dt * p.lambda / lambda0).min(remaining);
        let next = rk4(&y, dir * h, sc, law)?;
        if next.iter().any(|v| !v.is_finite()) || !(next[0] > 0.0) {
            traj.status = TrajectoryStatus::CollapseReached;
            break;
        }
        y = next;
        t = if h == remaining { t_end } else { t + dir * h };
        let (p, s) = unpack(&y);
        traj.push(t, s, p, diag(t, &p))?;
    }
    Ok(traj)
}

/// Eigen-structure of `[[0, -2], [k1, 1/C0]]`, the linear part of the
/// `(α₁, β₁)` system in the variable `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBetaSystem {
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    /// Columns span the real invariant subspaces: eigenvectors for a real
    /// pair, `(Re v, Im v)` for a complex pair.
    pub basis: [[f64; 2]; 2],
    /// `basis⁻¹ · matrix · basis`: diagonal, or `[[a, b], [-b, a]]`.
    pub normal_form: [[f64; 2]; 2],
    pub complex: bool,
    /// `k1 = 0`: a zero eigenvalue.
    pub degenerate: bool,
}

pub fn alpha_beta_linear_system(sc: &StructureConstants, k1: f64) -> Result<AlphaBetaSystem> {
    if !(k1 >= 0.0 && k1.is_finite()) {
        return Err(Error::InvalidParameter(format!("k1 must be ≥ 0, got {k1}")));
    }
    let tr = 1.0 / sc.c0;
    let det = 2.0 * k1;
    let matrix = [[0.0, -2.0], [k1, tr]];
    let disc = tr * tr - 4.0 * det;
    // (A - μ) v = 0 has v = (2, -μ).
    let (eigenvalues, basis, complex) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let (m1, m2) = (0.5 * (tr - sq), 0.5 * (tr + sq));
        (
            [Complex64::new(m1, 0.0), Complex64::new(m2, 0.0)],
            [[2.0, 2.0], [-m1, -m2]],
            false,
        )
    } else {
        let (a, b) = (0.5 * tr, 0.5 * (-disc).sqrt());
        (
            [Complex64::new(a, -b), Complex64::new(a, b)],
            [[2.0, 0.0], [-a, -b]],
            true,
        )
    };
    let normal_form = mat_mul(&mat_mul(&inverse(&basis)?, &matrix), &basis);
    Ok(AlphaBetaSystem {
        matrix,
        eigenvalues,
        basis,
        normal_form,
        complex,
        degenerate: k1 == 0.0,
    })
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut o = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn inverse(a: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return Err(Error::Singular("2x2 change of basis"));
    }
    Ok([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// `τ(t) = ∫_t^{t0} C0/(-z) dz = C0 ln(t/t0)` for `t ≤ t0 < 0`.
pub fn tau_of_t(t: f64, t0: f64, c0: f64) -> f64 {
    c0 * (t / t0).ln()
}

/// Outcome of the forced `(α₁, β₁)` integration.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeLemmaReport {
    pub t0: f64,
    pub t_final: f64,
    pub k1: f64,
    /// `sup (|α₁| + |β₁|) / (δ² λ(t))` with `λ(t) = -t/C0`.
    pub ratio_sup: f64,
    /// `(t, ratio)` along the run.
    pub ratios: Vec<(f64, f64)>,
    pub system: AlphaBetaSystem,
    pub bound: f64,
    pub pass: bool,
}

/// Integrates `d/dτ (α₁, β₁) = A (α₁, β₁) + F` from zero data at `t0` back to
/// `t_final < t0`, with the saturating force `|F₁| + |F₂| = δ² e^{τ/C0} (-t0)`
/// aligned with the most unstable real direction of `A`.
pub fn verify_ode_lemma(
    delta: f64,
    t0: f64,
    t_final: f64,
    sc: &StructureConstants,
    k1: f64,
    bound: f64,
) -> Result<OdeLemmaReport> {
    if !(t_final < t0 && t0 < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t_final < t0 < 0, got t_final = {t_final}, t0 = {t0}"
        )));
    }
    let system = alpha_beta_linear_system(sc, k1)?;
    let c0 = sc.c0;
    let dir = {
        let col = if system.complex { 0 } else { 1 };
        let v = [system.basis[0][col], system.basis[1][col]];
        let n = v[0].abs() + v[1].abs();
        [v[0] / n, v[1] / n]
    };
    let amp = delta * delta * (-t0);
    let a = system.matrix;
    let f = |tau: f64, x: [f64; 2]| {
        let g = amp * (tau / c0).exp();
        [
            a[0][0] * x[0] + a[0][1] * x[1] + g * dir[0],
            a[1][0] * x[0] + a[1][1] * x[1] + g * dir[1],
        ]
    };
    let tau_end = tau_of_t(t_final, t0, c0);
    let steps = ((tau_end / 1e-3).ceil() as usize).max(16);
    let h = tau_end / steps as f64;
    let mut x = [0.0; 2];
    let mut ratios = Vec::with_capacity(steps / 10 + 2);
    let mut ratio_sup = 0.0f64;
    let scale = delta * delta;
    for i in 0..steps {
        let tau = i as f64 * h;
        let k1v = f(tau, x);
        let k2v = f(tau + 0.5 * h, [x[0] + 0.5 * h * k1v[0], x[1] + 0.5 * h * k1v[1]]);
        let k3v = f(tau + 0.5 * h, [x[0] + 0.5 * h * k2v[0], x[1] + 0.5 * h * k2v[1]]);
        let k4v = f(tau + h, [x[0] + h * k3v[0], x[1] + h * k3v[1]]);
        for c in 0..2 {
            x[c] += h / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
        }
        let tau_n = (i + 1) as f64 * h;
        let t = t0 * (tau_n / c0).exp();
        let lambda = -t / c0;
        let r = if scale > 0.0 {
            (x[0].abs() + x[1].abs()) / (scale * lambda)
        } else {
            0.0
        };
        ratio_sup = ratio_sup.max(r);
        if (i + 1) % 10 == 0 || i + 1 == steps {
            ratios.push((t, r));
        }
    }
    Ok(OdeLemmaReport {
        t0,
        t_final,
        k1,
        ratio_sup,
        ratios,
        system,
        bound,
        pass: ratio_sup <= bound,
    })
}

#[cfg(test)]
mod tests;
