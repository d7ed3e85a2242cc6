//! The truncated scaling generator `Λ_A`, the functionals `I` and `I₁` of the
//! remainder `ε`, and the coercivity and monotonicity monitors.

use std::f64::consts::E;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linop::apply_m;
use crate::nlssim::{ansatz_field, decompose, Decomposition};
use crate::numerics::{derivative_nonuniform, CartesianGrid, Field2D};
use crate::profile::{chirp, residual_psi_tilde_reduced, CoefficientK, ModParams, ProfileBasis};
use crate::{Error, Result};

/// `φ'(r)`: `r` on `[0, 1]`, `3 - e^{-r}` on `[2, ∞)`, and on `[1, 2]` the
/// quintic matching value, slope and curvature at both ends.
pub fn phi_prime(r: f64) -> f64 {
    phi_prime_derivs(r).0
}

/// `(φ'(r), φ''(r))`.
pub fn phi_prime_derivs(r: f64) -> (f64, f64) {
    if r <= 1.0 {
        return (r, 1.0);
    }
    if r >= 2.0 {
        let e = (-r).exp();
        return (3.0 - e, e);
    }
    let e2 = E.powi(-2);
    let (g0, d0, c0) = (1.0, 1.0, 0.0);
    let (g1, d1, c1) = (3.0 - e2, e2, -e2);
    let s = r - 1.0;
    // Quintic Hermite basis on [0, 1].
    let h = [
        1.0 - 10.0 * s.powi(3) + 15.0 * s.powi(4) - 6.0 * s.powi(5),
        s - 6.0 * s.powi(3) + 8.0 * s.powi(4) - 3.0 * s.powi(5),
        0.5 * s * s - 1.5 * s.powi(3) + 1.5 * s.powi(4) - 0.5 * s.powi(5),
        10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5),
        -4.0 * s.powi(3) + 7.0 * s.powi(4) - 3.0 * s.powi(5),
        0.5 * s.powi(3) - s.powi(4) + 0.5 * s.powi(5),
    ];
    let dh = [
        -30.0 * s * s + 60.0 * s.powi(3) - 30.0 * s.powi(4),
        1.0 - 18.0 * s * s + 32.0 * s.powi(3) - 15.0 * s.powi(4),
        s - 4.5 * s * s + 6.0 * s.powi(3) - 2.5 * s.powi(4),
        30.0 * s * s - 60.0 * s.powi(3) + 30.0 * s.powi(4),
        -12.0 * s * s + 28.0 * s.powi(3) - 15.0 * s.powi(4),
        1.5 * s * s - 4.0 * s.powi(3) + 2.5 * s.powi(4),
    ];
    let coef = [g0, d0, c0, g1, d1, c1];
    let v = coef.iter().zip(&h).map(|(c, b)| c * b).sum();
    let d = coef.iter().zip(&dh).map(|(c, b)| c * b).sum();
    (v, d)
}

/// `(Δφ)(z) = φ''(|z|) + φ'(|z|)/|z|`.
pub fn laplacian_phi(z: [f64; 2]) -> f64 {
    let r = z[0].hypot(z[1]);
    if r <= 1.0 {
        return 2.0;
    }
    let (p, pp) = phi_prime_derivs(r);
    pp + p / r
}

/// The vector field `A (∇φ)(y/A)`.
fn truncated_field(y: [f64; 2], a: f64) -> [f64; 2] {
    let r = y[0].hypot(y[1]);
    if r <= a {
        return y;
    }
    let s = a * phi_prime(r / a) / r;
    [s * y[0], s * y[1]]
}

fn check_a(a: f64) -> Result<()> {
    if a >= 1.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("A must be at least 1, got {a}")))
    }
}

/// `Λ_A f = ½(Δφ)(y/A) f + A(∇φ)(y/A)·∇f`, evaluated in the symmetric form
/// `½[w·∇f + ∇·(w f)]` with `w = A(∇φ)(y/A)`, which is the same operator and
/// keeps `Re⟨Λ_A f, f⟩ = 0` exact at the quadrature level.
pub fn lambda_a(f: &Field2D, a: f64) -> Result<Field2D> {
    check_a(a)?;
    let m = f.m();
    let grid = f.grid;
    let mut w = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for i in 0..m {
        for j in 0..m {
            let v = truncated_field(grid.point(i, j), a);
            w[0][i * m + j] = v[0];
            w[1][i * m + j] = v[1];
        }
    }
    let [g1, g2] = f.gradient();
    let wf = [
        Field2D {
            grid,
            values: f.values.iter().zip(&w[0]).map(|(v, c)| v * c).collect(),
        },
        Field2D {
            grid,
            values: f.values.iter().zip(&w[1]).map(|(v, c)| v * c).collect(),
        },
    ];
    let d1 = wf[0].gradient()[0].clone();
    let d2 = wf[1].gradient()[1].clone();
    let mut out = Field2D::zeros(grid);
    for idx in 0..grid.len() {
        out.values[idx] = 0.5
            * (w[0][idx] * g1.values[idx]
                + w[1][idx] * g2.values[idx]
                + d1.values[idx]
                + d2.values[idx]);
    }
    Ok(out)
}

/// `Λ_A f` in the pointwise form `½(Δφ)(y/A) f + A(∇φ)(y/A)·∇f`.
pub fn lambda_a_pointwise(f: &Field2D, a: f64) -> Result<Field2D> {
    check_a(a)?;
    let [g1, g2] = f.gradient();
    let m = f.m();
    let mut out = f.clone();
    for i in 0..m {
        for j in 0..m {
            let y = f.grid.point(i, j);
            let idx = i * m + j;
            let w = truncated_field(y, a);
            out.values[idx] = 0.5 * laplacian_phi([y[0] / a, y[1] / a]) * f.values[idx]
                + w[0] * g1.values[idx]
                + w[1] * g2.values[idx];
        }
    }
    Ok(out)
}

/// `Re⟨f, g⟩ = Re ∫ f ḡ`.
pub fn re_inner(f: &Field2D, g: &Field2D) -> f64 {
    f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum::<f64>()
        * f.grid.cell_area()
}

/// Cubic and quartic terms in `ε` of `¼|q + ε|⁴`: `Re(q̄ε)|ε|² + ¼|ε|⁴`.
pub fn quartic_piece(q: Complex64, e: Complex64) -> f64 {
    let n = e.norm_sqr();
    (q.conj() * e).re * n + 0.25 * n * n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub t: f64,
    pub i_value: f64,
    pub i1_value: f64,
    /// `λ²I₁ - δ0 ‖ε‖²_{H¹}` for the `δ0` passed in.
    pub coercivity_gap: f64,
    /// `λ^{-2} Re⟨ε, Ψ_P⟩`
    pub correction_term: f64,
    /// `λ^{-2} ‖ε‖₂ ‖Ψ_P‖₂`, the Cauchy–Schwarz bound of the correction.
    pub correction_bound: f64,
    pub lambda: f64,
    pub eps_h1: f64,
    /// `|P|`
    pub p_size: f64,
}

impl LyapunovSample {
    pub fn lambda2_i1(&self) -> f64 {
        self.lambda * self.lambda * self.i1_value
    }
}

/// `Ψ_P = e^{-ib|y|²/4 + iβ·y} Ψ̃_P` on the grid of a decomposition.
pub fn psi_of(dec: &Decomposition, k: &CoefficientK) -> Result<Field2D> {
    let tilde = residual_psi_tilde_reduced(&dec.qp, &dec.sampled, k)?;
    Ok(tilde.map(|y, v| v * chirp(&dec.params, y)))
}

/// `I = λ^{-2} Re⟨M(ε) - ibΛ_Aε + 2iβ·∇ε, ε⟩ - ∫κ F(Q_P, ε)` and
/// `I₁ = I + λ^{-2} Re⟨ε, Ψ_P⟩`.
pub fn evaluate_i1(
    t: f64,
    dec: &Decomposition,
    psi: &Field2D,
    a: f64,
    delta0: f64,
) -> Result<LyapunovSample> {
    let eps = &dec.eps;
    eps.check_grid(psi)?;
    let p = &dec.params;
    let qp = &dec.qp;
    let i = Complex64::i();
    let mut op = apply_m(&qp.qp, &qp.kappa, eps)?;
    let lam = lambda_a(eps, a)?;
    let [g1, g2] = eps.gradient();
    for idx in 0..op.values.len() {
        op.values[idx] += -i * p.b * lam.values[idx]
            + 2.0 * i * (p.beta[0] * g1.values[idx] + p.beta[1] * g2.values[idx]);
    }
    let quadratic = re_inner(&op, eps);
    let da = eps.grid.cell_area();
    let f: f64 = (0..eps.values.len())
        .map(|idx| qp.kappa.values[idx].re * quartic_piece(qp.qp.values[idx], eps.values[idx]))
        .sum::<f64>()
        * da;
    let l2 = p.lambda * p.lambda;
    let i_value = quadratic / l2 - f;
    let correction_term = re_inner(eps, psi) / l2;
    let i1_value = i_value + correction_term;
    Ok(LyapunovSample {
        t,
        i_value,
        i1_value,
        coercivity_gap: l2 * i1_value - delta0 * dec.eps_h1 * dec.eps_h1,
        correction_term,
        correction_bound: dec.eps_l2 * psi.norm_l2() / l2,
        lambda: p.lambda,
        eps_h1: dec.eps_h1,
        p_size: p.size(),
    })
}

/// Fit of `λ²I₁ ≥ δ0 ‖ε‖²_{H¹} - C|P|³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityFit {
    /// Half the smallest ratio `λ²I₁ / ‖ε‖²_{H¹}` over samples where
    /// `‖ε‖²_{H¹}` dominates `|P|³`.
    pub delta0: f64,
    /// Smallest `C` making the bound hold on every sample with that `δ0`.
    pub c_cubic: f64,
    pub samples: usize,
    pub dominated: usize,
    pub pass: bool,
}

pub fn fit_coercivity(samples: &[LyapunovSample]) -> Result<CoercivityFit> {
    let dominated: Vec<&LyapunovSample> = samples
        .iter()
        .filter(|s| s.eps_h1 * s.eps_h1 >= 10.0 * s.p_size.powi(3))
        .collect();
    if dominated.is_empty() {
        return Err(Error::InvalidParameter(
            "no sample with ‖ε‖² above the |P|³ level".into(),
        ));
    }
    let ratio = dominated
        .iter()
        .map(|s| s.lambda2_i1() / (s.eps_h1 * s.eps_h1))
        .fold(f64::INFINITY, f64::min);
    let delta0 = 0.5 * ratio;
    let c_cubic = samples
        .iter()
        .map(|s| (delta0 * s.eps_h1 * s.eps_h1 - s.lambda2_i1()).max(0.0) / s.p_size.powi(3))
        .fold(0.0f64, f64::max);
    Ok(CoercivityFit {
        delta0,
        c_cubic,
        samples: samples.len(),
        dominated: dominated.len(),
        pass: delta0 > 0.0 && c_cubic.is_finite(),
    })
}

/// `I₁` at `n` seeded random states of critical mass near the ansatz:
/// `λ ∈ [λ_min, 10 λ_min]`, `b/λ ∈ [0.9, 1.1]`, `|α|/λ, |β|/λ ≤ 0.05`, and a
/// remainder of relative size `10^{-3}` to `10^{-1}` made of smooth bumps in
/// `y`. Each state is rescaled to mass `‖Q‖₂²` before it is decomposed.
pub fn sample_critical_mass(
    basis: &ProfileBasis,
    k: &CoefficientK,
    n: usize,
    lambda_min: f64,
    seed: u64,
) -> Result<Vec<LyapunovSample>> {
    if !(lambda_min > 0.0 && lambda_min <= 0.05) {
        return Err(Error::InvalidParameter(format!(
            "λ_min must lie in (0, 0.05], got {lambda_min}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let u01 = |rng: &mut ChaCha8Rng, a: f64| a * rng.gen_range(-1.0..1.0);
    for _ in 0..n {
        let lambda = lambda_min * 10f64.powf(rng.gen_range(0.0..1.0));
        let p = ModParams::new(
            lambda,
            lambda * rng.gen_range(0.9..1.1),
            [lambda * u01(&mut rng, 0.05), lambda * u01(&mut rng, 0.05)],
            [lambda * u01(&mut rng, 0.05), lambda * u01(&mut rng, 0.05)],
            rng.gen_range(0.0..6.0),
        );
        let grid = CartesianGrid::new(10.0 * lambda, 64)?;
        let size = 10f64.powf(rng.gen_range(-3.0..-1.0));
        let bumps: Vec<([f64; 2], f64, Complex64)> = (0..4)
            .map(|_| {
                (
                    [u01(&mut rng, 1.5), u01(&mut rng, 1.5)],
                    rng.gen_range(0.7..1.5),
                    Complex64::new(u01(&mut rng, 1.0), u01(&mut rng, 1.0)),
                )
            })
            .collect();
        let eps = Field2D::from_fn(grid, |x| {
            let y = [(x[0] - p.alpha[0]) / lambda, (x[1] - p.alpha[1]) / lambda];
            bumps
                .iter()
                .map(|(c, w, a)| {
                    let r2 = ((y[0] - c[0]).powi(2) + (y[1] - c[1]).powi(2)) / (w * w);
                    a * (-r2).exp()
                })
                .sum::<Complex64>()
                * Complex64::from_polar(size / lambda, p.gamma)
        });
        let mut u = ansatz_field(basis, k, &p, None, &grid)?;
        u.axpy(Complex64::new(1.0, 0.0), &eps);
        let mass = u.norm_l2().powi(2);
        let u = u.scale_real((basis.moments.mass / mass).sqrt());
        let dec = decompose(&u, &p, basis, k, 1e-10)?;
        let psi = psi_of(&dec, k)?;
        out.push(evaluate_i1(0.0, &dec, &psi, 10.0, 0.1)?);
    }
    Ok(out)
}

/// Centered differences of `I₁` in `t` along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub di1_dt: Vec<f64>,
    pub min_rate: f64,
    /// `max(0, -min dI₁/dt)`, the constant in `dI₁/dt ≥ -C`.
    pub c_needed: f64,
    /// Largest violation of `I₁(t) - I₁(t0) ≥ -C|t - t0|` with `C = c_needed`.
    pub integrated_slack: f64,
    pub pass: bool,
}

pub fn monotonicity_report(samples: &[LyapunovSample], c_bound: f64) -> Result<MonotonicityReport> {
    if samples.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "monotonicity needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let v: Vec<f64> = samples.iter().map(|s| s.i1_value).collect();
    let di1_dt = derivative_nonuniform(&t, &v);
    let min_rate = di1_dt.iter().copied().fold(f64::INFINITY, f64::min);
    let c_needed = (-min_rate).max(0.0);
    let (t0, v0) = (t[0], v[0]);
    let integrated_slack = t
        .iter()
        .zip(&v)
        .map(|(ti, vi)| {
            let (early, late) = if *ti >= t0 { (v0, *vi) } else { (*vi, v0) };
            (early - c_needed * (ti - t0).abs() - late).max(0.0)
        })
        .fold(0.0f64, f64::max);
    Ok(MonotonicityReport {
        di1_dt,
        min_rate,
        c_needed,
        integrated_slack,
        pass: min_rate >= -c_bound,
    })
}
