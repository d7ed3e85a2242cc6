//! The approximate profile `Q_P = (Q + T2) e^{-ib|y|²/4 + iβ·y}`, its
//! residual `Ψ_P` and the mass/energy expansion.

mod coefficient;
mod dump;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::groundstate::{compute_moments_with, Moments};
use crate::linop::{first_harmonic_kernel, solve_harmonic, solve_rho, FredholmReport};
use crate::numerics::{
    simpson_weights, CartesianGrid, Field2D, RadialProfile, RadialSampler,
};
use crate::{Error, Result};

pub use coefficient::{diagonalize_hessian, CoefficientK, KFamily};
pub use dump::{read_dump, write_dump};

/// Modulation parameters `P = (λ, b, α, β)` and the phase `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModParams {
    pub lambda: f64,
    pub b: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: f64,
}

impl ModParams {
    pub fn new(lambda: f64, b: f64, alpha: [f64; 2], beta: [f64; 2], gamma: f64) -> Self {
        Self {
            lambda,
            b,
            alpha,
            beta,
            gamma,
        }
    }

    /// `|P| = |λ| + |b| + |α| + |β|`.
    pub fn size(&self) -> f64 {
        self.lambda.abs()
            + self.b.abs()
            + self.alpha[0].hypot(self.alpha[1])
            + self.beta[0].hypot(self.beta[1])
    }

    /// Every component scaled by `s`, `γ` kept.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            lambda: s * self.lambda,
            b: s * self.b,
            alpha: [s * self.alpha[0], s * self.alpha[1]],
            beta: [s * self.beta[0], s * self.beta[1]],
            gamma: self.gamma,
        }
    }
}

/// `c0(α)_j = (∫Q⁴ / 2∫Q²) ∇²k(0)(e_j, α)`.
pub fn c0_of_alpha(moments: &Moments, k: &CoefficientK, alpha: [f64; 2]) -> [f64; 2] {
    let kappa0 = moments.kappa0();
    [
        kappa0 * k.hessian_form([1.0, 0.0], alpha),
        kappa0 * k.hessian_form([0.0, 1.0], alpha),
    ]
}

/// `κ(y) = k(λy + α) / k(α)` on the nodes of `grid`.
pub fn rescaled_k(k: &CoefficientK, p: &ModParams, grid: CartesianGrid) -> Field2D {
    let ka = k.eval(p.alpha);
    Field2D::from_real_fn(grid, |y| {
        k.eval([p.lambda * y[0] + p.alpha[0], p.lambda * y[1] + p.alpha[1]]) / ka
    })
}

/// Radial building blocks of `Q_P`, independent of `k` and `P`.
///
/// `T2` is assembled as
/// `-(λ²/2)[(k1+k2)/2 G0 + (k1-k2)/2 (y1²-y2²) G2] - λ Σ_j k_j α_j y_j F1`
/// with `A_0 G0 = r² Q³`, `A_2 G2 = Q³` and `A_1 F1 = Q³ - κ0 Q`, where
/// `A_m` is the radial part of `L+` on the harmonic of degree `m`.
#[derive(Debug, Clone)]
pub struct ProfileBasis {
    pub q: RadialProfile,
    pub dq: RadialProfile,
    /// `Q'/r`, the radial factor of `∂_j Q = y_j Q'/r`.
    pub kernel: RadialProfile,
    pub rho: RadialProfile,
    pub moments: Moments,
    pub g0: RadialProfile,
    pub g2: RadialProfile,
    pub f1: RadialProfile,
    /// Relative residuals of the three radial solves.
    pub solve_residuals: [f64; 3],
    /// Component of `Q³ - κ0 Q` along the kernel, relative to its norm.
    pub f1_defect: f64,
}

impl ProfileBasis {
    pub fn new(q: RadialProfile) -> Result<Self> {
        let grid = q.grid;
        let rho = solve_rho(&q)?;
        let moments = compute_moments_with(&q, &rho)?;
        let dq = q.derivative();
        let mut phi = first_harmonic_kernel(&q);
        phi.push(0.0);
        let kernel = RadialProfile::from_full(grid, &phi)?;
        let kappa0 = moments.kappa0();
        let g0 = solve_harmonic(&q, 0, &q.map(|r, v| r * r * v.powi(3)), 1e-10)?;
        let g2 = solve_harmonic(&q, 2, &q.map(|_, v| v.powi(3)), 1e-10)?;
        let f1 = solve_harmonic(&q, 1, &q.map(|_, v| v.powi(3) - kappa0 * v), 1e-6)?;
        let rhs_norm = {
            let g = q.map(|_, v| v.powi(3) - kappa0 * v);
            radial_pairing(&g, &g, 3).sqrt()
        };
        Ok(Self {
            q,
            dq,
            kernel,
            rho,
            moments,
            solve_residuals: [g0.residual, g2.residual, f1.residual],
            f1_defect: f1.compatibility_defect / rhs_norm,
            g0: g0.solution,
            g2: g2.solution,
            f1: f1.solution,
        })
    }

    /// Solves for `Q` on the default grid and builds the basis.
    pub fn with_default_ground_state() -> Result<Self> {
        let gs = crate::groundstate::solve_ground_state(crate::groundstate::default_grid(), 1e-9)?;
        Self::new(gs.q)
    }

    /// `⟨rhs_odd, ∂_j Q⟩`, `j = 1, 2`, for the odd part of the `T2` source.
    ///
    /// With `with_c0` the source is `λ ∇²k(0)(α, y) Q³ - λ c0(α)·y Q` and the
    /// pairing vanishes; without it the `c0` correction is dropped.
    pub fn compatibility_pairing(
        &self,
        k: &CoefficientK,
        lambda: f64,
        alpha: [f64; 2],
        with_c0: bool,
    ) -> [f64; 2] {
        let kappa0 = if with_c0 { self.moments.kappa0() } else { 0.0 };
        let g = self.q.map(|_, v| v.powi(3) - kappa0 * v);
        // ∫ y_j² g(r) Q'(r)/r dy = π ∫ g Q' r² dr
        let base = PI * radial_sum(&g, &self.dq, 2);
        let kj = [k.k1, k.k2];
        [
            -lambda * kj[0] * alpha[0] * base,
            -lambda * kj[1] * alpha[1] * base,
        ]
    }

    /// Samples the basis on a Cartesian `y` grid.
    pub fn sample(&self, grid: CartesianGrid) -> SampledBasis {
        let sampler = RadialSampler::new(&self.q.grid, grid);
        let lq = {
            let full: Vec<f64> = self
                .q
                .full()
                .iter()
                .zip(self.dq.full())
                .enumerate()
                .map(|(i, (q, d))| q + self.q.grid.r(i) * d)
                .collect();
            RadialProfile::from_full(self.q.grid, &full).expect("finite")
        };
        let kernel = sampler.sample_real(&self.kernel);
        let m = grid.m();
        let mut grad_q = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
        let mut y1 = vec![0.0; grid.len()];
        let mut y2 = vec![0.0; grid.len()];
        for i in 0..m {
            for j in 0..m {
                let y = grid.point(i, j);
                let idx = i * m + j;
                y1[idx] = y[0];
                y2[idx] = y[1];
                grad_q[0][idx] = y[0] * kernel[idx];
                grad_q[1][idx] = y[1] * kernel[idx];
            }
        }
        SampledBasis {
            grid,
            kappa0: self.moments.kappa0(),
            q: sampler.sample_real(&self.q),
            grad_q,
            lambda_q: sampler.sample_real(&lq),
            rho: sampler.sample_real(&self.rho),
            g0: sampler.sample_real(&self.g0),
            g2: sampler.sample_real(&self.g2),
            f1: sampler.sample_real(&self.f1),
            y: [y1, y2],
        }
    }
}

/// `Σ w_i a_i b_i r_i^p` over `r_0..r_n` with Simpson weights.
fn radial_sum(a: &RadialProfile, b: &RadialProfile, p: i32) -> f64 {
    let g = a.grid;
    let w = simpson_weights(g.len() + 1, g.spacing());
    a.full()
        .iter()
        .zip(b.full())
        .zip(&w)
        .enumerate()
        .map(|(i, ((x, y), wi))| wi * x * y * g.r(i).powi(p))
        .sum()
}

fn radial_pairing(a: &RadialProfile, b: &RadialProfile, p: i32) -> f64 {
    PI * radial_sum(a, b, p)
}

/// [`ProfileBasis`] sampled on a Cartesian grid. `∇Q` and `ΛQ` come from
/// the radial derivative of `Q`, which avoids the Gibbs error of spectral
/// differentiation of the truncated tail.
#[derive(Debug, Clone)]
pub struct SampledBasis {
    pub grid: CartesianGrid,
    pub kappa0: f64,
    pub q: Vec<f64>,
    pub grad_q: [Vec<f64>; 2],
    pub lambda_q: Vec<f64>,
    pub rho: Vec<f64>,
    pub g0: Vec<f64>,
    pub g2: Vec<f64>,
    pub f1: Vec<f64>,
    pub y: [Vec<f64>; 2],
}

/// `T2 = λ² quad + λ (α1 lin[0] + α2 lin[1])` on the grid.
#[derive(Debug, Clone)]
pub struct T2Parts {
    pub quad: Vec<f64>,
    pub lin: [Vec<f64>; 2],
}

impl SampledBasis {
    pub fn field(&self, v: &[f64]) -> Field2D {
        Field2D {
            grid: self.grid,
            values: v.iter().map(|x| Complex64::new(*x, 0.0)).collect(),
        }
    }

    pub fn t2_parts(&self, k: &CoefficientK) -> T2Parts {
        let (s, d) = (0.5 * (k.k1 + k.k2), 0.5 * (k.k1 - k.k2));
        let n = self.q.len();
        let mut quad = vec![0.0; n];
        let mut lin = [vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let (y1, y2) = (self.y[0][i], self.y[1][i]);
            quad[i] = -0.5 * (s * self.g0[i] + d * (y1 * y1 - y2 * y2) * self.g2[i]);
            lin[0][i] = -k.k1 * y1 * self.f1[i];
            lin[1][i] = -k.k2 * y2 * self.f1[i];
        }
        T2Parts { quad, lin }
    }

    pub fn t2(&self, k: &CoefficientK, lambda: f64, alpha: [f64; 2]) -> Vec<f64> {
        let parts = self.t2_parts(k);
        parts.combine(lambda, alpha)
    }
}

impl T2Parts {
    pub fn combine(&self, lambda: f64, alpha: [f64; 2]) -> Vec<f64> {
        let l2 = lambda * lambda;
        let (a1, a2) = (lambda * alpha[0], lambda * alpha[1]);
        (0..self.quad.len())
            .map(|i| l2 * self.quad[i] + a1 * self.lin[0][i] + a2 * self.lin[1][i])
            .collect()
    }
}

/// Builds `T2` on the basis grid. The report carries the largest
/// compatibility pairing `|⟨rhs, ∂_j Q⟩|` (with the `c0` correction) and the
/// largest relative residual of the radial solves.
pub fn build_t2(
    basis: &ProfileBasis,
    sampled: &SampledBasis,
    k: &CoefficientK,
    lambda: f64,
    alpha: [f64; 2],
) -> FredholmReport<Field2D> {
    let t2 = sampled.t2(k, lambda, alpha);
    let pair = basis.compatibility_pairing(k, lambda, alpha, true);
    FredholmReport {
        solution: sampled.field(&t2),
        compatibility_defect: pair[0].abs().max(pair[1].abs()),
        iterations: 1,
        residual: basis.solve_residuals.iter().fold(0.0f64, |a, b| a.max(*b)),
    }
}

/// `Q_P` on a grid together with its real amplitude `P = Q + T2`.
#[derive(Debug, Clone)]
pub struct ProfileQP {
    pub params: ModParams,
    pub c0: [f64; 2],
    pub amplitude: Field2D,
    pub t2: Field2D,
    pub qp: Field2D,
    pub kappa: Field2D,
}

/// `e^{-ib|y|²/4 + iβ·y}` at `y`.
pub fn chirp(p: &ModParams, y: [f64; 2]) -> Complex64 {
    let phase = -0.25 * p.b * (y[0] * y[0] + y[1] * y[1]) + p.beta[0] * y[0] + p.beta[1] * y[1];
    Complex64::from_polar(1.0, phase)
}

pub fn assemble_qp(
    basis: &ProfileBasis,
    sampled: &SampledBasis,
    k: &CoefficientK,
    params: &ModParams,
) -> Result<ProfileQP> {
    if !(k.eval(params.alpha) > 0.0) {
        return Err(Error::NonPositiveK(params.alpha[0], params.alpha[1]));
    }
    let grid = sampled.grid;
    let t2 = sampled.t2(k, params.lambda, params.alpha);
    let amp: Vec<f64> = sampled.q.iter().zip(&t2).map(|(a, b)| a + b).collect();
    let amplitude = sampled.field(&amp);
    let qp = amplitude.map(|y, v| v * chirp(params, y));
    Ok(ProfileQP {
        params: *params,
        c0: c0_of_alpha(&basis.moments, k, params.alpha),
        amplitude,
        t2: sampled.field(&t2),
        qp,
        kappa: rescaled_k(k, params, grid),
    })
}

/// `Ψ_P` from its defining expression with spectral derivatives:
///
/// `-[-ib² ∂_b Q_P + i(-bβ + λc0)·∂_β Q_P + ΔQ_P - Q_P + κ|Q_P|²Q_P
///    + ibΛQ_P - 2iβ·∇Q_P - |β|² Q_P]`,
///
/// with the exact phase derivatives `∂_b Q_P = -i|y|²/4 Q_P` and
/// `∂_β Q_P = i y Q_P`.
pub fn residual_psi(qp: &ProfileQP) -> Field2D {
    let p = &qp.params;
    let u = &qp.qp;
    let lap = u.laplacian();
    let [g1, g2] = u.gradient();
    let i = Complex64::i();
    let drift = [-p.b * p.beta[0] + p.lambda * qp.c0[0], -p.b * p.beta[1] + p.lambda * qp.c0[1]];
    let beta2 = p.beta[0] * p.beta[0] + p.beta[1] * p.beta[1];
    let mut out = u.clone();
    let m = u.m();
    for a in 0..m {
        for c in 0..m {
            let y = u.grid.point(a, c);
            let idx = a * m + c;
            let v = u.values[idx];
            let r2 = y[0] * y[0] + y[1] * y[1];
            let d_b = -i * 0.25 * r2 * v;
            let d_beta = [i * y[0] * v, i * y[1] * v];
            let grad = [g1.values[idx], g2.values[idx]];
            let lam_v = v + y[0] * grad[0] + y[1] * grad[1];
            let kappa = qp.kappa.values[idx].re;
            let total = -i * p.b * p.b * d_b
                + i * (drift[0] * d_beta[0] + drift[1] * d_beta[1])
                + lap.values[idx]
                - v
                + kappa * v.norm_sqr() * v
                + i * p.b * lam_v
                - 2.0 * i * (p.beta[0] * grad[0] + p.beta[1] * grad[1])
                - beta2 * v;
            out.values[idx] = -total;
        }
    }
    out
}

/// `Ψ̃ = e^{ib|y|²/4 - iβ·y} Ψ`.
pub fn psi_tilde(psi: &Field2D, p: &ModParams) -> Field2D {
    psi.map(|y, v| v * chirp(p, y).conj())
}

/// `Ψ̃_P` with the equations of `Q` and `T2` used exactly:
///
/// `-[(κ - κ₂)Q³ + 3(κ - 1)Q²T2 + κ(3QT2² + T2³) - λ c0·y T2]`,
///
/// where `κ₂ = 1 + λ∇²k(0)(α, y) + (λ²/2)∇²k(0)(y, y)` is the Taylor part
/// absorbed by `T2`. Pointwise, so free of differentiation error.
pub fn residual_psi_tilde_reduced(
    qp: &ProfileQP,
    sampled: &SampledBasis,
    k: &CoefficientK,
) -> Result<Field2D> {
    if !qp.qp.grid.same_as(&sampled.grid) {
        return Err(Error::GridMismatch("profile and basis on different grids".into()));
    }
    let p = &qp.params;
    let mut out = Field2D::zeros(sampled.grid);
    for idx in 0..out.values.len() {
        let y = [sampled.y[0][idx], sampled.y[1][idx]];
        let q = sampled.q[idx];
        let t = qp.t2.values[idx].re;
        let kappa = qp.kappa.values[idx].re;
        let kappa2 =
            1.0 + p.lambda * k.hessian_form(p.alpha, y) + 0.5 * p.lambda * p.lambda * k.hessian_form(y, y);
        let drift = p.lambda * (qp.c0[0] * y[0] + qp.c0[1] * y[1]);
        let v = (kappa - kappa2) * q * q * q
            + 3.0 * (kappa - 1.0) * q * q * t
            + kappa * (3.0 * q * t * t + t * t * t)
            - drift * t;
        out.values[idx] = Complex64::new(-v, 0.0);
    }
    Ok(out)
}

/// `sup e^{w|y|} |f|`.
pub fn weighted_sup(f: &Field2D, w: f64) -> f64 {
    let m = f.m();
    let mut s = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let y = f.grid.point(i, j);
            s = s.max((w * y[0].hypot(y[1])).exp() * f.values[i * m + j].norm());
        }
    }
    s
}

/// Mass and rescaled energy of `Q_P` against their predicted expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassEnergy {
    pub mass: f64,
    /// `∫|Q_P|² - ∫Q²`, both on the grid.
    pub mass_defect: f64,
    /// `Ẽ(Q_P) = ½∫|∇Q_P|² - ¼∫κ|Q_P|⁴`
    pub energy: f64,
    /// `b²/8 ∫|y|²Q² + |β|²/2 ∫Q² - λ²/8 ∫∇²k(0)(y,y) Q⁴`
    pub predicted_energy: f64,
    /// `Ẽ(Q)` on the grid. Zero in the continuum; its discrete value is of
    /// the size of the error in `Q` and is removed from the defect.
    pub baseline_energy: f64,
    /// `Ẽ(Q_P) - Ẽ(Q) - predicted`
    pub energy_defect: f64,
}

pub fn mass_energy_of_qp(
    qp: &ProfileQP,
    sampled: &SampledBasis,
    k: &CoefficientK,
    moments: &Moments,
) -> MassEnergy {
    let p = &qp.params;
    let da = sampled.grid.cell_area();
    let q_mass: f64 = sampled.q.iter().map(|v| v * v).sum::<f64>() * da;
    let mass = qp.qp.norm_l2().powi(2);
    // |∇Q_P|² = |∇P|² + P²|∇φ|² for real P and phase φ.
    // ∇Q from the radial derivative, ∇T2 spectrally.
    let [g1, g2] = qp.t2.gradient();
    let mut grad2 = 0.0;
    let mut quartic = 0.0;
    let mut base = 0.0;
    for idx in 0..qp.amplitude.values.len() {
        let y = [sampled.y[0][idx], sampled.y[1][idx]];
        let a = qp.amplitude.values[idx].re;
        let phase_grad = [-0.5 * p.b * y[0] + p.beta[0], -0.5 * p.b * y[1] + p.beta[1]];
        let gp = [
            sampled.grad_q[0][idx] + g1.values[idx].re,
            sampled.grad_q[1][idx] + g2.values[idx].re,
        ];
        grad2 += gp[0] * gp[0]
            + gp[1] * gp[1]
            + a * a * (phase_grad[0].powi(2) + phase_grad[1].powi(2));
        quartic += qp.kappa.values[idx].re * a.powi(4);
        let q = sampled.q[idx];
        base += 0.5 * (sampled.grad_q[0][idx].powi(2) + sampled.grad_q[1][idx].powi(2))
            - 0.25 * q.powi(4);
    }
    let baseline_energy = base * da;
    let energy = (0.5 * grad2 - 0.25 * quartic) * da;
    let t = moments.quartic_tensor;
    let beta2 = p.beta[0] * p.beta[0] + p.beta[1] * p.beta[1];
    let predicted_energy = p.b * p.b / 8.0 * moments.variance
        + 0.5 * beta2 * moments.mass
        + p.lambda * p.lambda / 8.0 * (k.k1 * t[0][0] + k.k2 * t[1][1]);
    MassEnergy {
        mass,
        mass_defect: mass - q_mass,
        energy,
        predicted_energy,
        baseline_energy,
        energy_defect: energy - baseline_energy - predicted_energy,
    }
}
