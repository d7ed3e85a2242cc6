//! Linearized operators `L±` around `Q`, their inversion, `ρ`, the
//! coercivity form and the perturbed operator `M` around `Q_P`.

pub mod radial;

use num_complex::Complex64;

use crate::numerics::{
    inner, simpson_weights, Field2D, RadialGrid, RadialProfile,
};
use crate::profile::SampledBasis;
use crate::{Error, Result};
use radial::{from_interior, interior, RadialOperator};

pub use radial::RadialSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `L+ = -Δ + 1 - 3Q²`
    Plus,
    /// `L- = -Δ + 1 - Q²`
    Minus,
}

/// Solution of `L+ u = g` together with its solvability bookkeeping.
#[derive(Debug, Clone)]
pub struct FredholmReport<S> {
    pub solution: S,
    /// Norm of the projection of the right-hand side onto the kernel.
    pub compatibility_defect: f64,
    pub iterations: usize,
    /// Relative residual against the projected right-hand side.
    pub residual: f64,
}

/// `L± f` with the spectral Laplacian; `q` is `Q` sampled on `f`'s grid.
pub fn apply_l(q: &Field2D, f: &Field2D, which: Which) -> Result<Field2D> {
    f.check_grid(q)?;
    let c = match which {
        Which::Plus => 3.0,
        Which::Minus => 1.0,
    };
    let lap = f.laplacian();
    let mut out = f.clone();
    for (k, o) in out.values.iter_mut().enumerate() {
        let q2 = q.values[k].re * q.values[k].re;
        *o = -lap.values[k] + *o * (1.0 - c * q2);
    }
    Ok(out)
}

/// `ρ`: the radial solution of `L+ ρ = |y|² Q`.
pub fn solve_rho(q: &RadialProfile) -> Result<RadialProfile> {
    let rhs = q.map(|r, v| r * r * v);
    Ok(solve_harmonic(q, 0, &rhs, 1e-10)?.solution)
}

/// Kernel profile `Q'/r` of the first-harmonic part of `L+`, at `r_0..r_{n-1}`.
pub fn first_harmonic_kernel(q: &RadialProfile) -> Vec<f64> {
    let g = q.grid;
    let h = g.spacing();
    let dq = q.derivative();
    let mut phi: Vec<f64> = (1..g.len()).map(|i| dq.at(i) / g.r(i)).collect();
    let q2 = (-2.0 * q.at(2) + 32.0 * q.at(1) - 30.0 * q.at(0)) / (12.0 * h * h);
    phi.insert(0, q2);
    phi
}

/// Solves the radial part of `L+ (Y_m f) = Y_m g` for a harmonic polynomial
/// `Y_m` of degree `m ∈ {0, 1, 2}`.
///
/// For `m = 1` the operator has the kernel `Q'/r` (translations); the
/// solution is taken orthogonal to it and the component of `g` along it is
/// reported as the compatibility defect, normalized as for `Y_1 = y_j`.
pub fn solve_harmonic(
    q: &RadialProfile,
    m: u32,
    g: &RadialProfile,
    tol: f64,
) -> Result<FredholmReport<RadialProfile>> {
    if q.grid != g.grid {
        return Err(Error::GridMismatch("Q and rhs on different radial grids".into()));
    }
    let grid = q.grid;
    let op = RadialOperator::with_q(q, m, 3.0)?;
    let solver = op.factor()?;
    let rhs = interior(g);
    let (f, defect, projected) = if m == 1 {
        let phi = first_harmonic_kernel(q);
        let w = weights(grid, 3);
        let (f, _) = solver.solve_bordered(&rhs, &phi, &w);
        let pair = |a: &[f64], b: &[f64]| -> f64 {
            std::f64::consts::PI * a.iter().zip(b).zip(&w).map(|((x, y), z)| x * y * z).sum::<f64>()
        };
        let phi_norm = pair(&phi, &phi).sqrt();
        let c = pair(&rhs, &phi) / pair(&phi, &phi);
        let defect = pair(&rhs, &phi).abs() / phi_norm;
        let g_norm = pair(&rhs, &rhs).sqrt();
        if defect > tol * g_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Incompatible {
                defect,
                tol: tol * g_norm,
            });
        }
        let projected: Vec<f64> = rhs.iter().zip(&phi).map(|(a, b)| a - c * b).collect();
        (f, defect, projected)
    } else {
        (solver.solve(&rhs), 0.0, rhs.clone())
    };
    let af = op.apply(&f);
    let scale = projected.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let residual = af
        .iter()
        .zip(&projected)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        / scale.max(f64::MIN_POSITIVE);
    Ok(FredholmReport {
        solution: from_interior(grid, &f)?,
        compatibility_defect: defect,
        iterations: 1,
        residual,
    })
}

/// Simpson weights times `r^p` at `r_0..r_{n-1}`.
fn weights(grid: RadialGrid, p: i32) -> Vec<f64> {
    let mut w = simpson_weights(grid.len(), grid.spacing());
    w.pop();
    w.iter()
        .enumerate()
        .map(|(i, wi)| wi * grid.r(i).powi(p))
        .collect()
}

fn re_inner(a: &Field2D, b: &Field2D) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum::<f64>()
        * a.grid.cell_area()
}

/// Solves `L+ u = P⊥ g` on a periodic grid, `P⊥` projecting off `∇Q`.
///
/// CGLS on `B = S L+ S = I - S (3Q²) S` with `S = (-Δ + 1)^{-1/2}`; starting
/// from zero gives the minimal-norm solution, which is then projected off
/// `∇Q` as well.
pub fn solve_lplus(q: &Field2D, g: &Field2D, tol: f64) -> Result<FredholmReport<Field2D>> {
    g.check_grid(q)?;
    let grad = q.gradient();
    let norms: Vec<f64> = grad.iter().map(|d| re_inner(d, d)).collect();
    let g_norm = g.norm_l2();
    let mut projected = g.clone();
    let mut defect2 = 0.0;
    for (d, n) in grad.iter().zip(&norms) {
        let c = inner(g, d)? / *n;
        defect2 += c.norm_sqr() * n;
        projected.axpy(-c, d);
    }
    let defect = defect2.sqrt();
    if defect > tol * g_norm {
        return Err(Error::Incompatible {
            defect,
            tol: tol * g_norm,
        });
    }

    let s_half = |f: &Field2D| {
        f.fourier_multiply(|k1, k2| Complex64::new((1.0 + k1 * k1 + k2 * k2).powf(-0.5), 0.0))
    };
    let v: Vec<f64> = q.values.iter().map(|x| 3.0 * x.re * x.re).collect();
    let apply_b = |z: &Field2D| {
        let mut t = s_half(z);
        t.values.iter_mut().zip(&v).for_each(|(a, b)| *a *= b);
        let t = s_half(&t);
        z - &t
    };

    let c = s_half(&projected);
    let c_norm = c.norm_l2();
    let mut x = Field2D::zeros(q.grid);
    let mut s = c.clone();
    let mut r = apply_b(&s);
    let mut p = r.clone();
    let mut gamma = re_inner(&r, &r);
    let mut iterations = 0;
    let max_iter = 20_000;
    while s.norm_l2() > 0.1 * tol * c_norm && iterations < max_iter && gamma > 0.0 {
        let qv = apply_b(&p);
        let alpha = gamma / re_inner(&qv, &qv);
        x.axpy(Complex64::new(alpha, 0.0), &p);
        s.axpy(Complex64::new(-alpha, 0.0), &qv);
        r = apply_b(&s);
        let gamma_new = re_inner(&r, &r);
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        p = p.scale_real(beta);
        p.axpy(Complex64::new(1.0, 0.0), &r);
        iterations += 1;
    }

    let mut u = s_half(&x);
    for (d, n) in grad.iter().zip(&norms) {
        let c = inner(&u, d)? / *n;
        u.axpy(-c, d);
    }
    let lu = apply_l(q, &u, Which::Plus)?;
    let residual = (&lu - &projected).norm_l2() / projected.norm_l2().max(f64::MIN_POSITIVE);
    if residual > tol {
        return Err(Error::NoConvergence {
            solver: "projected CGLS for L+",
            residual,
            iterations,
        });
    }
    Ok(FredholmReport {
        solution: u,
        compatibility_defect: defect,
        iterations,
        residual,
    })
}

/// `⟨L+ ε1, ε1⟩ + ⟨L- ε2, ε2⟩` and the projections
/// `(⟨ε1, Q⟩, ⟨ε1, |y|²Q⟩, |⟨ε1, yQ⟩|, ⟨ε2, Q⟩)`.
pub fn coercivity_form(q: &Field2D, eps: &Field2D) -> Result<(f64, [f64; 4])> {
    eps.check_grid(q)?;
    let e1 = eps.real_part();
    let e2 = eps.map(|_, v| Complex64::new(v.im, 0.0));
    let value = re_inner(&apply_l(q, &e1, Which::Plus)?, &e1)
        + re_inner(&apply_l(q, &e2, Which::Minus)?, &e2);
    let yq = [q.times_coord(0), q.times_coord(1)];
    let p = [
        re_inner(&e1, q),
        re_inner(&e1, &q.times_r2()),
        re_inner(&e1, &yq[0]).hypot(re_inner(&e1, &yq[1])),
        re_inner(&e2, q),
    ];
    Ok((value, p))
}

/// First-order part in `ε` of the profile equation around `Q_P`:
/// `-Δε + ε - κ (2|Q_P|² ε + Q_P² ε̄)`, with `κ = k(λy+α)/k(α)`.
pub fn apply_m(qp: &Field2D, k_resc: &Field2D, eps: &Field2D) -> Result<Field2D> {
    eps.check_grid(qp)?;
    eps.check_grid(k_resc)?;
    let lap = eps.laplacian();
    let mut out = eps.clone();
    for (k, o) in out.values.iter_mut().enumerate() {
        let p = qp.values[k];
        let e = eps.values[k];
        let kk = k_resc.values[k].re;
        *o = -lap.values[k] + e - kk * (2.0 * p.norm_sqr() * e + p * p * e.conj());
    }
    Ok(out)
}

/// Sup residuals of `L+ ∇Q = 0`, `L+ ΛQ = -2Q`, `L- Q = 0`,
/// `L- yQ = -2∇Q` and `L- |y|²Q = -4ΛQ` on the core `|y_j| ≤ L/2` of the grid
/// of `s`. `∇Q` and `ΛQ` are the radially differentiated fields of `s`.
pub fn spectral_identities(s: &SampledBasis) -> Result<[(&'static str, f64); 5]> {
    let grid = s.grid;
    let real = |v: &[f64]| Field2D::from_values(grid, v.iter().map(|x| Complex64::new(*x, 0.0)).collect());
    let q = real(&s.q)?;
    let grad = [real(&s.grad_q[0])?, real(&s.grad_q[1])?];
    let lq = real(&s.lambda_q)?;
    let core = |f: &Field2D| f.sup_norm_core(0.5);
    let residual = |f: &Field2D, which: Which, target: &Field2D, c: f64| -> Result<f64> {
        let mut r = apply_l(&q, f, which)?;
        r.axpy(Complex64::new(-c, 0.0), target);
        Ok(core(&r))
    };
    let zero = Field2D::zeros(grid);
    let mut kernel = 0.0f64;
    let mut moment = 0.0f64;
    for j in 0..2 {
        kernel = kernel.max(residual(&grad[j], Which::Plus, &zero, 0.0)?);
        moment = moment.max(residual(&q.times_coord(j), Which::Minus, &grad[j], -2.0)?);
    }
    Ok([
        ("lplus_grad_q", kernel),
        ("lplus_lambda_q", residual(&lq, Which::Plus, &q, -2.0)?),
        ("lminus_q", residual(&q, Which::Minus, &zero, 0.0)?),
        ("lminus_y_q", moment),
        ("lminus_r2_q", residual(&q.times_r2(), Which::Minus, &lq, -4.0)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::{default_grid, solve_ground_state};
    use crate::numerics::{CartesianGrid, RadialSampler};

    fn small_q() -> RadialProfile {
        let g = RadialGrid::new(20.0, 1024).unwrap();
        solve_ground_state(g, 1e-9).unwrap().q
    }

    #[test]
    fn m_reduces_to_l_plus_and_l_minus() {
        let q = small_q();
        let grid = CartesianGrid::new(10.0, 64).unwrap();
        let qf = RadialSampler::new(&q.grid, grid).sample(&q);
        let one = Field2D::from_real_fn(grid, |_| 1.0);
        let f = Field2D::from_real_fn(grid, |y| (-(y[0] * y[0] + 2.0 * y[1] * y[1])).exp() * (1.0 + y[0]));
        let m_re = apply_m(&qf, &one, &f).unwrap();
        let lp = apply_l(&qf, &f, Which::Plus).unwrap();
        assert!((&m_re - &lp).sup_norm() < 1e-12);
        let fi = f.scale(Complex64::i());
        let m_im = apply_m(&qf, &one, &fi).unwrap();
        let lm = apply_l(&qf, &f, Which::Minus).unwrap().scale(Complex64::i());
        assert!((&m_im - &lm).sup_norm() < 1e-12);
    }

    #[test]
    fn spectral_identities_hold_and_converge() {
        use crate::numerics::CartesianGrid;
        use crate::profile::ProfileBasis;
        let grid = CartesianGrid::new(16.0, 256).unwrap();
        let sup = |n: usize| {
            let q = solve_ground_state(RadialGrid::new(25.0, n).unwrap(), 1e-10).unwrap().q;
            let s = ProfileBasis::new(q).unwrap().sample(grid);
            spectral_identities(&s).unwrap()
        };
        for (name, r) in sup(4096) {
            assert!(r <= 1e-6, "{name} {r}");
        }
        // Above the interpolation floor of ~6e-8 the decrease is fourth order.
        let (coarse, fine) = (sup(1024), sup(2048));
        for ((name, c), (_, f)) in coarse.iter().zip(&fine) {
            assert!((c / f).log2() >= 2.0, "{name} {c} {f}");
        }
    }

    #[test]
    fn lplus_inverts_minus_two_q_to_lambda_q() {
        use crate::profile::ProfileBasis;
        let b = ProfileBasis::with_default_ground_state().unwrap();
        let grid = CartesianGrid::new(12.0, 128).unwrap();
        let s = b.sample(grid);
        let real = |v: &[f64]| Field2D::from_values(grid, v.iter().map(|x| Complex64::new(*x, 0.0)).collect()).unwrap();
        let q = real(&s.q);
        let rep = solve_lplus(&q, &q.scale_real(-2.0), 1e-8).unwrap();
        let back = apply_l(&q, &rep.solution, Which::Plus).unwrap();
        assert!((&back + &q.scale_real(2.0)).norm_l2() < 1e-7 * q.norm_l2());
        // Up to the kernel the solution is ΛQ, which is already orthogonal to ∇Q.
        let lq = real(&s.lambda_q);
        assert!((&rep.solution - &lq).norm_l2() < 1e-4 * lq.norm_l2(), "{}", (&rep.solution - &lq).norm_l2() / lq.norm_l2());
    }

    #[test]
    fn m_is_self_adjoint_and_linearizes_the_nonlinearity() {
        let q = small_q();
        let grid = CartesianGrid::new(8.0, 64).unwrap();
        let qf = RadialSampler::new(&q.grid, grid).sample(&q);
        let qp = qf.map(|y, v| v * Complex64::from_polar(1.0, -0.05 * (y[0] * y[0] + y[1] * y[1]) + 0.1 * y[0]));
        let kr = Field2D::from_real_fn(grid, |y| (-0.01 * (y[0] * y[0] + 0.5 * y[1] * y[1])).exp());
        let f = Field2D::from_fn(grid, |y| {
            Complex64::new(1.0 + y[1], 0.5 * y[0]) * (-(y[0] * y[0] + y[1] * y[1]) / 3.0).exp()
        });
        let g = Field2D::from_fn(grid, |y| {
            Complex64::new(y[0] - 0.2, 1.0) * (-((y[0] - 0.5).powi(2) + y[1] * y[1]) / 2.0).exp()
        });
        let mf = apply_m(&qp, &kr, &f).unwrap();
        let mg = apply_m(&qp, &kr, &g).unwrap();
        assert!((re_inner(&mf, &g) - re_inner(&f, &mg)).abs() < 1e-10);
        // Central differences of N(w) = -Δw + w - κ|w|²w at Q_P in direction f.
        let n = |w: &Field2D| {
            let lap = w.laplacian();
            Field2D::from_values(
                grid,
                (0..w.values.len())
                    .map(|i| {
                        let v = w.values[i];
                        -lap.values[i] + v - kr.values[i].re * v.norm_sqr() * v
                    })
                    .collect(),
            )
            .unwrap()
        };
        let tau = 1e-5;
        let mut plus = qp.clone();
        plus.axpy(Complex64::new(tau, 0.0), &f);
        let mut minus = qp.clone();
        minus.axpy(Complex64::new(-tau, 0.0), &f);
        let fd = (&n(&plus) - &n(&minus)).scale_real(0.5 / tau);
        assert!((&fd - &mf).norm_l2() < 1e-8 * mf.norm_l2());
    }

    #[test]
    fn coercivity_on_projected_random_fields() {
        use rand::{Rng, SeedableRng};
        let q = solve_ground_state(default_grid(), 1e-10).unwrap().q;
        let grid = CartesianGrid::new(12.0, 128).unwrap();
        let qf = RadialSampler::new(&q.grid, grid).sample(&q);
        let (value, proj) = coercivity_form(&qf, &qf.scale(Complex64::i())).unwrap();
        assert!(value.abs() < 1e-6, "{value}");
        assert!((proj[3] - re_inner(&qf, &qf)).abs() < 1e-10);
        let dirs1 = [qf.clone(), qf.times_r2(), qf.times_coord(0), qf.times_coord(1)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = rng.gen_range(0.5..2.0);
            let mut e = Field2D::from_fn(grid, |y| {
                let g = (-(y[0] * y[0] + y[1] * y[1]) / (2.0 * w * w)).exp();
                Complex64::new(
                    g * (c[0] + c[1] * y[0] + c[2] * y[1] + c[3] * y[0] * y[1]),
                    g * (c[4] + c[5] * y[0] + c[6] * y[1] * y[1] + c[7] * y[0] * y[0]),
                )
            });
            // Gram-Schmidt of ε1 against Q, |y|²Q, y1Q, y2Q and of ε2 against Q.
            let mut basis: Vec<Field2D> = Vec::new();
            for d in &dirs1 {
                let mut v = d.clone();
                for b in &basis {
                    let c = re_inner(&v, b);
                    v.axpy(Complex64::new(-c, 0.0), b);
                }
                let n = v.norm_l2();
                basis.push(v.scale_real(1.0 / n));
            }
            let mut e1 = e.real_part();
            for b in &basis {
                let c = re_inner(&e1, b);
                e1.axpy(Complex64::new(-c, 0.0), b);
            }
            let mut e2 = e.map(|_, v| Complex64::new(v.im, 0.0));
            let c2 = re_inner(&e2, &basis[0]);
            e2.axpy(Complex64::new(-c2, 0.0), &basis[0]);
            e = &e1 + &e2.scale(Complex64::i());
            let (value, proj) = coercivity_form(&qf, &e).unwrap();
            assert!(proj.iter().all(|p| p.abs() < 1e-10));
            let h1 = crate::numerics::norms(&e).h1;
            worst = worst.min(value / (h1 * h1));
        }
        assert!(worst >= 0.05, "{worst}");
    }

    #[test]
    fn kernel_rhs_is_rejected() {
        let q = small_q();
        let grid = CartesianGrid::new(10.0, 64).unwrap();
        let qf = RadialSampler::new(&q.grid, grid).sample(&q);
        let d1 = qf.gradient()[0].clone();
        assert!(matches!(
            solve_lplus(&qf, &d1, 1e-6),
            Err(Error::Incompatible { .. })
        ));
    }

    #[test]
    fn rho_pairs_with_q_like_half_variance() {
        // ⟨ρ, Q⟩ = -½⟨ρ, L+ ΛQ⟩ = -½⟨|y|²Q, ΛQ⟩ = ½‖yQ‖².
        let q = solve_ground_state(default_grid(), 1e-10).unwrap().q;
        let m = crate::groundstate::compute_moments(&q).unwrap();
        assert!((m.rho_pairings.1 - 0.5 * m.variance).abs() < 1e-8 * m.variance);
    }
}
