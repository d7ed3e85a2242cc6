//! Fourth-order finite-difference radial operators
//!
//! For a harmonic `m`, the 2D operator `-Δ + 1 - V(|y|)` acting on
//! `Y_m(y) f(|y|)` with `Y_m` a homogeneous harmonic polynomial of degree `m`
//! reduces to `-f'' - (2m+1) f'/r + f - V f`. Unknowns are `f(r_0), ..., f(r_{n-1})`
//! with `f(r_n) = 0`; ghosts use the even extension at the origin and the odd
//! one across `r_max`.

use crate::numerics::{BandedLu, BandedMatrix, RadialGrid, RadialProfile};
use crate::{Error, Result};

const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

/// `-∂rr - (2m+1)/r ∂r + 1 - V` on a radial grid.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    grid: RadialGrid,
    harmonic: u32,
    potential: Vec<f64>,
}

impl RadialOperator {
    /// `potential` holds `V` at `r_0..=r_n`.
    pub fn new(grid: RadialGrid, harmonic: u32, potential: Vec<f64>) -> Result<Self> {
        if harmonic > 2 {
            return Err(Error::InvalidHarmonic(harmonic));
        }
        if potential.len() != grid.len() + 1 {
            return Err(Error::InvalidGrid("potential length".into()));
        }
        Ok(Self {
            grid,
            harmonic,
            potential,
        })
    }

    /// Operator with potential `c Q²`, e.g. `c = 3` for `L+` and `c = 1` for `L-`.
    pub fn with_q(q: &RadialProfile, harmonic: u32, c: f64) -> Result<Self> {
        let v = q.full().iter().map(|x| c * x * x).collect();
        Self::new(q.grid, harmonic, v)
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    /// Nonzero entries `(column, coefficient)` of row `i`.
    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let c = 2.0 * self.harmonic as f64 + 1.0;
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(5);
        let mut push = |col: usize, v: f64| {
            if let Some(e) = out.iter_mut().find(|e| e.0 == col) {
                e.1 += v;
            } else {
                out.push((col, v));
            }
        };
        for (o, (d2, d1)) in D2.iter().zip(D1.iter()).enumerate() {
            let coef = if i == 0 {
                -(c + 1.0) * d2 / (12.0 * h * h)
            } else {
                -d2 / (12.0 * h * h) - c * d1 / (12.0 * h * self.grid.r(i))
            };
            if coef == 0.0 {
                continue;
            }
            let j = i as isize + o as isize - 2;
            let j = j.unsigned_abs();
            if j < n {
                push(j, coef);
            } else if j == n + 1 {
                push(n - 1, -coef);
            }
        }
        push(i, 1.0 - self.potential[i]);
        out
    }

    /// Applies the operator to `f(r_0..r_{n-1})`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.row(i).iter().map(|(j, c)| c * f[*j]).sum())
            .collect()
    }

    pub fn matrix(&self) -> BandedMatrix {
        let n = self.grid.len();
        let mut a = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for (j, c) in self.row(i) {
                a.add(i, j, c);
            }
        }
        a
    }

    pub fn factor(&self) -> Result<RadialSolver> {
        Ok(RadialSolver {
            op: self.clone(),
            lu: self.matrix().factor()?,
        })
    }
}

/// Factorized radial operator.
#[derive(Debug, Clone)]
pub struct RadialSolver {
    op: RadialOperator,
    lu: BandedLu,
}

impl RadialSolver {
    pub fn operator(&self) -> &RadialOperator {
        &self.op
    }

    /// Solves `A f = g` with two steps of iterative refinement.
    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        let mut f = self.lu.solve(g);
        for _ in 0..2 {
            let af = self.op.apply(&f);
            let r: Vec<f64> = g.iter().zip(&af).map(|(a, b)| a - b).collect();
            let d = self.lu.solve(&r);
            f.iter_mut().zip(&d).for_each(|(x, y)| *x += y);
        }
        f
    }

    /// Solves `A f + μ φ = g`, `Σ w φ f = 0` for an operator whose kernel
    /// is approximately spanned by `φ`, with `w` the quadrature weights of the
    /// pairing. Returns `(f, μ)`; `μ` measures the incompatibility of `g`.
    pub fn solve_bordered(&self, g: &[f64], phi: &[f64], w: &[f64]) -> (Vec<f64>, f64) {
        let n = g.len();
        let wphi: Vec<f64> = w.iter().zip(phi).map(|(a, b)| a * b).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let x2 = self.lu.solve(phi);
        let denom = dot(&wphi, &x2);
        let block = |rhs: &[f64], rc: f64| -> (Vec<f64>, f64) {
            let x1 = self.lu.solve(rhs);
            let mu = (dot(&wphi, &x1) - rc) / denom;
            let f: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a - mu * b).collect();
            (f, mu)
        };
        let (mut f, mut mu) = block(g, 0.0);
        for _ in 0..3 {
            let af = self.op.apply(&f);
            let r: Vec<f64> = (0..n).map(|i| g[i] - af[i] - mu * phi[i]).collect();
            let rc = -dot(&wphi, &f);
            let (df, dmu) = block(&r, rc);
            f.iter_mut().zip(&df).for_each(|(x, y)| *x += y);
            mu += dmu;
        }
        (f, mu)
    }
}

/// Values at `r_0..r_{n-1}` of a profile (dropping the boundary node).
pub(crate) fn interior(p: &RadialProfile) -> Vec<f64> {
    let mut v = p.full();
    v.pop();
    v
}

/// Profile from interior values, with `f(r_max) = 0`.
pub(crate) fn from_interior(grid: RadialGrid, f: &[f64]) -> Result<RadialProfile> {
    let mut v = f.to_vec();
    v.push(0.0);
    RadialProfile::from_full(grid, &v)
}
