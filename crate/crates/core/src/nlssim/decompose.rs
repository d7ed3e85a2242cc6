use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::modulation::initial_params;
use crate::numerics::{norms, CartesianGrid, Field2D};
use crate::profile::{
    assemble_qp, chirp, CoefficientK, ModParams, ProfileBasis, ProfileQP, SampledBasis,
};
use crate::{Error, Result};

/// Jacobians with a larger condition number are flagged as near-degenerate.
pub const CONDITION_LIMIT: f64 = 1e8;

const MAX_ITERATIONS: usize = 30;

/// `u = k(α)^{-1/2} λ^{-1} (Q_P + ε)((x - α)/λ) e^{iγ}` with `ε` orthogonal to
/// the seven modulation directions.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub params: ModParams,
    /// `ε` on the rescaled grid `y = (x - α)/λ`.
    pub eps: Field2D,
    /// `Im⟨∂_1 Q_P, ε⟩, Im⟨∂_2 Q_P, ε⟩, Re⟨y_1 Q_P, ε⟩, Re⟨y_2 Q_P, ε⟩,
    /// Im⟨ΛQ_P, ε⟩, Re⟨|y|² Q_P, ε⟩, Im⟨ε, ρ e^{-ib|y|²/4 + iβ·y}⟩`
    pub ortho_residuals: [f64; 7],
    pub eps_l2: f64,
    pub eps_h1: f64,
    pub iterations: usize,
    /// Condition number of the column-scaled Jacobian at the solution.
    pub condition: f64,
    pub near_degenerate: bool,
    pub qp: ProfileQP,
    pub sampled: SampledBasis,
}

impl Decomposition {
    pub fn max_residual(&self) -> f64 {
        self.ortho_residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()))
    }
}

/// The rescaled grid: the exact affine image `y = (x - α)/λ` of `x_grid`.
pub fn y_grid(x_grid: &CartesianGrid, p: &ModParams) -> Result<CartesianGrid> {
    if !(p.lambda > 0.0 && p.lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {}", p.lambda)));
    }
    let c = x_grid.center();
    x_grid.rescaled(
        x_grid.half_width() / p.lambda,
        [(c[0] - p.alpha[0]) / p.lambda, (c[1] - p.alpha[1]) / p.lambda],
    )
}

/// `Q_P` for `p` on the rescaled grid of `x_grid`.
pub fn profile_on(
    basis: &ProfileBasis,
    k: &CoefficientK,
    x_grid: &CartesianGrid,
    p: &ModParams,
) -> Result<(SampledBasis, ProfileQP)> {
    let sampled = basis.sample(y_grid(x_grid, p)?);
    let qp = assemble_qp(basis, &sampled, k, p)?;
    Ok((sampled, qp))
}

/// Field on `x_grid` given by the ansatz with parameters `p` and remainder
/// `eps` (on the rescaled grid; `None` for `ε = 0`).
pub fn ansatz_field(
    basis: &ProfileBasis,
    k: &CoefficientK,
    p: &ModParams,
    eps: Option<&Field2D>,
    x_grid: &CartesianGrid,
) -> Result<Field2D> {
    let (_, qp) = profile_on(basis, k, x_grid, p)?;
    let mut v = qp.qp;
    if let Some(e) = eps {
        if !e.grid.same_as(&v.grid) {
            return Err(Error::GridMismatch("ε is not on the rescaled grid of P".into()));
        }
        v.axpy(Complex64::new(1.0, 0.0), e);
    }
    let c = Complex64::from_polar(1.0 / (k.eval(p.alpha).sqrt() * p.lambda), p.gamma);
    Ok(Field2D {
        grid: *x_grid,
        values: v.values.iter().map(|z| z * c).collect(),
    })
}

/// Initial data `u0 = λ0^{-1} Q_{P0}(x/λ0) e^{iγ0}` with
/// `λ0 = -t0/C0`, `b0 = -t0/C0²`, `α0 = β0 = 0`, `γ0 = -C0²/t0`.
///
/// Rejects data whose scale spans fewer than `collapse_floor` grid cells.
pub fn make_initial_data(
    c0: f64,
    t0: f64,
    basis: &ProfileBasis,
    k: &CoefficientK,
    x_grid: &CartesianGrid,
    collapse_floor: f64,
) -> Result<(Field2D, ModParams)> {
    let p0 = initial_params(c0, t0)?;
    let h = x_grid.spacing();
    if p0.lambda < collapse_floor * h {
        let need = (collapse_floor * 2.0 * x_grid.half_width() / p0.lambda).ceil() as usize;
        return Err(Error::InvalidParameter(format!(
            "λ0 = {:e} spans {:.2} grid cells, below the floor of {collapse_floor}; \
             use m ≥ {} at half width {}",
            p0.lambda,
            p0.lambda / h,
            need.next_power_of_two(),
            x_grid.half_width()
        )));
    }
    Ok((ansatz_field(basis, k, &p0, None, x_grid)?, p0))
}

/// `W(y) = k(α)^{1/2} λ u(λy + α) e^{-iγ}` on the rescaled grid.
fn pull_back(u: &Field2D, k: &CoefficientK, p: &ModParams, grid: CartesianGrid) -> Field2D {
    let c = Complex64::from_polar(k.eval(p.alpha).sqrt() * p.lambda, -p.gamma);
    Field2D {
        grid,
        values: u.values.iter().map(|z| z * c).collect(),
    }
}

/// The test functions of the seven orthogonality conditions.
#[derive(Debug, Clone)]
pub struct TestFunctions {
    pub grad: [Field2D; 2],
    pub y: [Field2D; 2],
    pub lambda: Field2D,
    pub r2: Field2D,
    pub rho: Field2D,
}

/// `∇Q_P`, `yQ_P`, `ΛQ_P`, `|y|²Q_P` and `ρ e^{iφ}` with
/// `φ = -b|y|²/4 + β·y`. `∇Q` is radial, `∇T2` spectral and the phase
/// derivative exact.
pub fn test_functions(qp: &ProfileQP, sampled: &SampledBasis) -> TestFunctions {
    let p = &qp.params;
    let [dt1, dt2] = qp.t2.gradient();
    let n = sampled.q.len();
    let grid = sampled.grid;
    let mut grad = [Field2D::zeros(grid), Field2D::zeros(grid)];
    let mut y = [Field2D::zeros(grid), Field2D::zeros(grid)];
    let mut lambda = Field2D::zeros(grid);
    let mut r2 = Field2D::zeros(grid);
    let mut rho = Field2D::zeros(grid);
    let i = Complex64::i();
    for idx in 0..n {
        let yy = [sampled.y[0][idx], sampled.y[1][idx]];
        let e = chirp(p, yy);
        let amp = qp.amplitude.values[idx].re;
        let dphi = [-0.5 * p.b * yy[0] + p.beta[0], -0.5 * p.b * yy[1] + p.beta[1]];
        let dp = [
            sampled.grad_q[0][idx] + dt1.values[idx].re,
            sampled.grad_q[1][idx] + dt2.values[idx].re,
        ];
        for j in 0..2 {
            grad[j].values[idx] = (dp[j] + i * amp * dphi[j]) * e;
            y[j].values[idx] = qp.qp.values[idx] * yy[j];
        }
        let t2 = qp.t2.values[idx].re;
        let lam_amp = sampled.lambda_q[idx]
            + t2
            + yy[0] * dt1.values[idx].re
            + yy[1] * dt2.values[idx].re;
        lambda.values[idx] = (lam_amp + i * amp * (yy[0] * dphi[0] + yy[1] * dphi[1])) * e;
        r2.values[idx] = qp.qp.values[idx] * (yy[0] * yy[0] + yy[1] * yy[1]);
        rho.values[idx] = e * sampled.rho[idx];
    }
    TestFunctions {
        grad,
        y,
        lambda,
        r2,
        rho,
    }
}

/// `Re⟨T, ε⟩ = ∫(T1 ε1 + T2 ε2)`.
fn pair_re(t: &Field2D, e: &Field2D) -> f64 {
    t.values
        .iter()
        .zip(&e.values)
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum::<f64>()
        * t.grid.cell_area()
}

/// `∫(T1 ε2 - T2 ε1)`.
fn pair_im(t: &Field2D, e: &Field2D) -> f64 {
    t.values
        .iter()
        .zip(&e.values)
        .map(|(a, b)| a.re * b.im - a.im * b.re)
        .sum::<f64>()
        * t.grid.cell_area()
}

impl TestFunctions {
    /// The seven conditions evaluated on `e`, in the order of
    /// [`Decomposition::ortho_residuals`].
    pub fn residuals(&self, e: &Field2D) -> [f64; 7] {
        [
            pair_im(&self.grad[0], e),
            pair_im(&self.grad[1], e),
            pair_re(&self.y[0], e),
            pair_re(&self.y[1], e),
            pair_im(&self.lambda, e),
            pair_re(&self.r2, e),
            pair_im(&self.rho, e),
        ]
    }
}

fn pack(p: &ModParams) -> SVector<f64, 7> {
    SVector::from([p.lambda, p.b, p.alpha[0], p.alpha[1], p.beta[0], p.beta[1], p.gamma])
}

fn unpack(v: &SVector<f64, 7>) -> ModParams {
    ModParams::new(v[0], v[1], [v[2], v[3]], [v[4], v[5]], v[6])
}

/// Derivatives of `ε` with respect to `(λ, b, α1, α2, β1, β2, γ)` at fixed `y`.
fn eps_derivatives(
    w: &Field2D,
    qp: &ProfileQP,
    sampled: &SampledBasis,
    k: &CoefficientK,
) -> [Field2D; 7] {
    let p = &qp.params;
    let [gw1, gw2] = w.gradient();
    let parts = sampled.t2_parts(k);
    let ka = k.eval(p.alpha);
    let gk = k.gradient(p.alpha);
    let i = Complex64::i();
    let grid = w.grid;
    let mut d: [Field2D; 7] = std::array::from_fn(|_| Field2D::zeros(grid));
    let l = p.lambda;
    for idx in 0..w.values.len() {
        let y = [sampled.y[0][idx], sampled.y[1][idx]];
        let e = chirp(p, y);
        let wv = w.values[idx];
        let q = qp.qp.values[idx];
        let gw = [gw1.values[idx], gw2.values[idx]];
        let dt2_dl =
            2.0 * l * parts.quad[idx] + p.alpha[0] * parts.lin[0][idx] + p.alpha[1] * parts.lin[1][idx];
        d[0].values[idx] = wv / l + (y[0] * gw[0] + y[1] * gw[1]) / l - e * dt2_dl;
        d[1].values[idx] = i * 0.25 * (y[0] * y[0] + y[1] * y[1]) * q;
        for j in 0..2 {
            d[2 + j].values[idx] =
                wv * (0.5 * gk[j] / ka) + gw[j] / l - e * (l * parts.lin[j][idx]);
            d[4 + j].values[idx] = -i * y[j] * q;
        }
        d[6].values[idx] = -i * wv;
    }
    d
}

struct Frame {
    sampled: SampledBasis,
    qp: ProfileQP,
    w: Field2D,
    eps: Field2D,
    tests: TestFunctions,
    residuals: [f64; 7],
}

fn frame(
    u: &Field2D,
    p: &ModParams,
    basis: &ProfileBasis,
    k: &CoefficientK,
) -> Result<Frame> {
    let (sampled, qp) = profile_on(basis, k, &u.grid, p)?;
    let w = pull_back(u, k, p, sampled.grid);
    let eps = &w - &qp.qp;
    let tests = test_functions(&qp, &sampled);
    let residuals = tests.residuals(&eps);
    Ok(Frame {
        sampled,
        qp,
        w,
        eps,
        tests,
        residuals,
    })
}

fn jacobian(f: &Frame, k: &CoefficientK) -> SMatrix<f64, 7, 7> {
    let d = eps_derivatives(&f.w, &f.qp, &f.sampled, k);
    let mut j = SMatrix::<f64, 7, 7>::zeros();
    for (c, field) in d.iter().enumerate() {
        let r = f.tests.residuals(field);
        for (row, v) in r.iter().enumerate() {
            j[(row, c)] = *v;
        }
    }
    j
}

fn scaled_condition(j: &SMatrix<f64, 7, 7>) -> f64 {
    let mut s = *j;
    for c in 0..7 {
        let n = s.column(c).norm();
        if n > 0.0 {
            s.column_mut(c).scale_mut(1.0 / n);
        }
    }
    let sv = s.singular_values();
    let (hi, lo) = sv.iter().fold((0.0f64, f64::INFINITY), |(h, l), v| (h.max(*v), l.min(*v)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Newton iteration on the seven orthogonality conditions, starting from
/// `guess`. Converged when every condition is below `tol · ‖Q‖₂²`.
///
/// The Jacobian is assembled from the exact derivatives of `ε` in the
/// parameters; the derivatives of the test functions are dropped, which
/// costs a factor `O(‖ε‖)` in the contraction rate.
pub fn decompose(
    u: &Field2D,
    guess: &ModParams,
    basis: &ProfileBasis,
    k: &CoefficientK,
    tol: f64,
) -> Result<Decomposition> {
    let target = tol * basis.moments.mass;
    let mut p = *guess;
    let mut f = frame(u, &p, basis, k)?;
    let mut iterations = 0;
    loop {
        let worst = f.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if worst <= target {
            break;
        }
        if iterations == MAX_ITERATIONS || !worst.is_finite() {
            return Err(Error::DecompositionFailed {
                residuals: f.residuals,
            });
        }
        let j = jacobian(&f, k);
        let r = SVector::from(f.residuals);
        let delta = j.lu().solve(&(-r)).ok_or(Error::Singular("decomposition Jacobian"))?;
        let mut step = 1.0;
        // Keep λ positive and within a factor two per iteration.
        while (p.lambda + step * delta[0]) < 0.5 * p.lambda
            || (p.lambda + step * delta[0]) > 2.0 * p.lambda
        {
            step *= 0.5;
        }
        p = unpack(&(pack(&p) + delta * step));
        f = frame(u, &p, basis, k)?;
        iterations += 1;
    }
    let condition = scaled_condition(&jacobian(&f, k));
    let n = norms(&f.eps);
    Ok(Decomposition {
        params: p,
        ortho_residuals: f.residuals,
        eps_l2: n.l2,
        eps_h1: n.h1,
        eps: f.eps,
        iterations,
        condition,
        near_degenerate: condition > CONDITION_LIMIT,
        qp: f.qp,
        sampled: f.sampled,
    })
}
