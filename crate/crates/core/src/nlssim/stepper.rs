use num_complex::Complex64;

use crate::numerics::fft2;
use crate::numerics::{CartesianGrid, Field2D};
use crate::profile::CoefficientK;
use crate::{Error, Result};

/// Splitting scheme of one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Second order: half free flight, nonlinear rotation, half free flight.
    Strang,
    /// Fourth order: three Strang steps with the triple-jump weights.
    #[default]
    TripleJump,
}

impl Scheme {
    /// Relative sizes of the Strang steps making up one step.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Scheme::Strang => vec![1.0],
            Scheme::TripleJump => {
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                vec![w1, 1.0 - 2.0 * w1, w1]
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Strang => "strang",
            Scheme::TripleJump => "triple_jump",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "strang" => Some(Scheme::Strang),
            "triple_jump" => Some(Scheme::TripleJump),
            _ => None,
        }
    }
}

/// Strang split-step integrator for `i u_t + Δu = -k(x)|u|²u` on a periodic
/// box: half free flight, nonlinear phase rotation, half free flight.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: CartesianGrid,
    k_field: Vec<f64>,
    k2: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: CartesianGrid, k: &CoefficientK) -> Self {
        let m = grid.m();
        let mut k_field = Vec::with_capacity(grid.len());
        let mut k2 = Vec::with_capacity(grid.len());
        for i in 0..m {
            for j in 0..m {
                k_field.push(k.eval(grid.point(i, j)));
                let (a, b) = (grid.wavenumber(i), grid.wavenumber(j));
                k2.push(a * a + b * b);
            }
        }
        Self { grid, k_field, k2 }
    }

    /// Stepper with `k ≡ 0`, the free Schrödinger flow.
    pub fn linear(grid: CartesianGrid) -> Self {
        let mut s = Self::new(grid, &CoefficientK::homogeneous());
        s.k_field.iter_mut().for_each(|v| *v = 0.0);
        s
    }

    pub fn grid(&self) -> CartesianGrid {
        self.grid
    }

    fn check(&self, u: &Field2D) -> Result<()> {
        if u.grid.same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("field and stepper on different grids".into()))
        }
    }

    fn free_symbol(&self, tau: f64) -> Vec<Complex64> {
        self.k2
            .iter()
            .map(|k2| Complex64::from_polar(1.0, -k2 * tau))
            .collect()
    }

    fn free(&self, values: &mut [Complex64], symbol: &[Complex64]) {
        let m = self.grid.m();
        fft2(values, m, false);
        values.iter_mut().zip(symbol).for_each(|(v, s)| *v *= s);
        fft2(values, m, true);
    }

    fn nonlinear(&self, values: &mut [Complex64], dt: f64) {
        for (v, k) in values.iter_mut().zip(&self.k_field) {
            *v *= Complex64::from_polar(1.0, k * v.norm_sqr() * dt);
        }
    }

    /// One Strang step of size `dt`.
    pub fn step(&self, u: &mut Field2D, dt: f64) -> Result<()> {
        self.advance_with(u, dt, 1, Scheme::Strang)
    }

    /// `n` Strang steps of size `dt`; adjacent half free flights are merged.
    pub fn advance(&self, u: &mut Field2D, dt: f64, n: usize) -> Result<()> {
        self.advance_with(u, dt, n, Scheme::Strang)
    }

    /// `n` steps of size `dt` of `scheme`. Each step is a palindromic chain
    /// of Strang steps; free flights between nonlinear rotations are merged.
    pub fn advance_with(&self, u: &mut Field2D, dt: f64, n: usize, scheme: Scheme) -> Result<()> {
        self.check(u)?;
        if n == 0 {
            return Ok(());
        }
        let c = scheme.weights();
        let first = 0.5 * c[0];
        let mut symbols: Vec<(f64, Vec<Complex64>)> = Vec::new();
        let mut flight = |values: &mut [Complex64], w: f64| {
            let i = match symbols.iter().position(|(x, _)| *x == w) {
                Some(i) => i,
                None => {
                    symbols.push((w, self.free_symbol(w * dt)));
                    symbols.len() - 1
                }
            };
            self.free(values, &symbols[i].1);
        };
        flight(&mut u.values, first);
        let total = n * c.len();
        for j in 0..total {
            let w = c[j % c.len()];
            self.nonlinear(&mut u.values, w * dt);
            let next = if j + 1 == total {
                0.5 * w
            } else {
                0.5 * (w + c[(j + 1) % c.len()])
            };
            flight(&mut u.values, next);
        }
        if let Some(i) = u.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(())
    }

    /// `n` steps backward in time through `u(t - τ) = conj(S_τ conj(u(t)))`.
    pub fn advance_backward(
        &self,
        u: &mut Field2D,
        dt: f64,
        n: usize,
        scheme: Scheme,
    ) -> Result<()> {
        u.values.iter_mut().for_each(|v| *v = v.conj());
        let r = self.advance_with(u, dt, n, scheme);
        u.values.iter_mut().for_each(|v| *v = v.conj());
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: CartesianGrid, w: f64) -> Field2D {
        Field2D::from_fn(grid, |y| {
            Complex64::new((-(y[0] * y[0] + y[1] * y[1]) / (2.0 * w * w)).exp(), 0.0)
        })
    }

    fn variance(u: &Field2D) -> f64 {
        let w = u.map(|y, v| v * (y[0] * y[0] + y[1] * y[1]).sqrt());
        w.norm_l2().powi(2) / u.norm_l2().powi(2)
    }

    #[test]
    fn free_gaussian_spreads_by_the_variance_law() {
        // For real Gaussian data ⟨|x|²⟩(t) = ⟨|x|²⟩(0) + 4t² ∫|∇u0|² / ∫|u0|².
        let grid = CartesianGrid::new(20.0, 128).unwrap();
        let w = 1.0;
        let mut u = gaussian(grid, w);
        let v0 = variance(&u);
        let stepper = Stepper::linear(grid);
        let t = 0.8;
        stepper.advance(&mut u, t / 10.0, 10).unwrap();
        let grad_ratio = 1.0 / (w * w);
        let expected = v0 + 4.0 * t * t * grad_ratio;
        assert!((variance(&u) - expected).abs() < 1e-10 * expected, "{} {}", variance(&u), expected);
    }

    #[test]
    fn single_step_preserves_mass() {
        let grid = CartesianGrid::new(10.0, 64).unwrap();
        let k = CoefficientK::quadratic_gaussian(1.0, 0.5).unwrap();
        let mut u = gaussian(grid, 1.0).scale(Complex64::new(2.0, 0.5));
        let m0 = u.norm_l2().powi(2);
        Stepper::new(grid, &k).step(&mut u, 1e-2).unwrap();
        assert!((u.norm_l2().powi(2) - m0).abs() <= 1e-13 * m0);
    }

    #[test]
    fn merged_steps_match_single_steps() {
        let grid = CartesianGrid::new(10.0, 64).unwrap();
        let k = CoefficientK::quadratic_gaussian(1.0, 1.0).unwrap();
        let s = Stepper::new(grid, &k);
        let u0 = gaussian(grid, 1.2).scale(Complex64::new(2.0, 0.0));
        let mut a = u0.clone();
        s.advance(&mut a, 1e-3, 5).unwrap();
        let mut b = u0;
        for _ in 0..5 {
            s.step(&mut b, 1e-3).unwrap();
        }
        assert!((&a - &b).norm_l2() < 1e-12);
    }

    #[test]
    fn backward_undoes_forward() {
        let grid = CartesianGrid::new(10.0, 64).unwrap();
        let k = CoefficientK::quadratic_gaussian(1.0, 1.0).unwrap();
        let s = Stepper::new(grid, &k);
        let u0 = gaussian(grid, 1.0).scale(Complex64::new(2.0, 0.3));
        let mut u = u0.clone();
        s.advance(&mut u, 2e-3, 50).unwrap();
        s.advance_backward(&mut u, 2e-3, 50, Scheme::Strang).unwrap();
        assert!((&u - &u0).norm_l2() < 1e-12 * u0.norm_l2());
    }
}
