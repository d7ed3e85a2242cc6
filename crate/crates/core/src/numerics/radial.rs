use std::f64::consts::PI;

use super::RadialGrid;
use crate::{Error, Result};

/// A radial function sampled on a [`RadialGrid`].
///
/// `values[i - 1]` is the value at node `r_i`; the value at the origin is
/// stored in `value_at_zero`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub value_at_zero: f64,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, value_at_zero: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !value_at_zero.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(Self {
            grid,
            values,
            value_at_zero,
        })
    }

    /// Builds a profile from `n + 1` values including the origin.
    pub fn from_full(grid: RadialGrid, full: &[f64]) -> Result<Self> {
        if full.len() != grid.len() + 1 {
            return Err(Error::InvalidGrid(format!(
                "expected {} values including the origin, got {}",
                grid.len() + 1,
                full.len()
            )));
        }
        Self::new(grid, full[0], full[1..].to_vec())
    }

    /// Samples `f` at the origin and every node.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let full: Vec<f64> = (0..=grid.len()).map(|i| f(grid.r(i))).collect();
        Self::from_full(grid, &full)
    }

    /// Values at `r_0 = 0, r_1, ..., r_n`.
    pub fn full(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.values.len() + 1);
        v.push(self.value_at_zero);
        v.extend_from_slice(&self.values);
        v
    }

    /// Value at node `i`, `i = 0` being the origin.
    pub fn at(&self, i: usize) -> f64 {
        if i == 0 {
            self.value_at_zero
        } else {
            self.values[i - 1]
        }
    }

    /// Applies `f(r, value)` at the origin and every node.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let full: Vec<f64> = (0..=self.grid.len())
            .map(|i| f(self.grid.r(i), self.at(i)))
            .collect();
        Self {
            grid: self.grid,
            value_at_zero: full[0],
            values: full[1..].to_vec(),
        }
    }

    /// Interpolated value at radius `r` (zero beyond `r_max`).
    pub fn eval(&self, r: f64) -> f64 {
        RadialStencil::new(&self.grid, r).apply_profile(self)
    }

    /// First derivative by fourth-order central differences, using the even
    /// extension at the origin. The result is odd, so its origin value is 0.
    pub fn derivative(&self) -> Self {
        let f = self.full();
        let n = self.grid.len();
        let h = self.grid.spacing();
        let get = |i: isize| -> f64 {
            let k = i.unsigned_abs();
            if k > n {
                0.0
            } else {
                f[k]
            }
        };
        let mut d = vec![0.0; n + 1];
        for (i, di) in d.iter_mut().enumerate().skip(1) {
            let i = i as isize;
            *di = (get(i - 2) - 8.0 * get(i - 1) + 8.0 * get(i + 1) - get(i + 2)) / (12.0 * h);
        }
        Self {
            grid: self.grid,
            value_at_zero: 0.0,
            values: d[1..].to_vec(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(self.value_at_zero.abs(), |m, v| m.max(v.abs()))
    }
}

/// 2π ∫₀^{r_max} f(r) r^{1+p} dr by composite Simpson quadrature.
///
/// For a radial function in the plane and `p = 0` this is `∫ f dy`.
pub fn integrate_radial(f: &RadialProfile, p: i32) -> Result<f64> {
    let n = f.grid.len();
    let w = simpson_weights(n, f.grid.spacing());
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        let v = f.at(i);
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        let r = f.grid.r(i);
        let rp = if i == 0 {
            if p + 1 > 0 {
                0.0
            } else {
                return Err(Error::InvalidParameter(format!("r^{} diverges at 0", p + 1)));
            }
        } else {
            r.powi(p + 1)
        };
        acc += wi * v * rp;
    }
    Ok(2.0 * PI * acc)
}

/// Composite Simpson weights on `n + 1` equispaced nodes, with a 3/8 panel at
/// the end when `n` is odd.
pub(crate) fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let even = if n % 2 == 0 { n } else { n - 3 };
    for k in (0..even).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if even != n {
        let c = 3.0 * h / 8.0;
        w[even] += c;
        w[even + 1] += 3.0 * c;
        w[even + 2] += 3.0 * c;
        w[even + 3] += c;
    }
    w
}

const STENCIL: usize = 8;

/// Eight-point Lagrange interpolation weights for one radius, reusable across
/// several profiles on the same grid.
#[derive(Debug, Clone, Copy)]
pub struct RadialStencil {
    base: isize,
    weights: [f64; STENCIL],
    outside: bool,
}

impl RadialStencil {
    pub fn new(grid: &RadialGrid, r: f64) -> Self {
        let r = r.abs();
        if r >= grid.r_max() || !r.is_finite() {
            return Self {
                base: 0,
                weights: [0.0; STENCIL],
                outside: true,
            };
        }
        let x = r / grid.spacing();
        let base = x.floor() as isize - (STENCIL as isize / 2 - 1);
        let t = x - base as f64;
        let mut weights = [0.0; STENCIL];
        // Exact node hit: avoid 0/0 in the barycentric form.
        let nearest = t.round();
        if (t - nearest).abs() < 1e-14 && (0.0..STENCIL as f64).contains(&nearest) {
            weights[nearest as usize] = 1.0;
        } else {
            for (k, wk) in weights.iter_mut().enumerate() {
                let mut num = 1.0;
                let mut den = 1.0;
                for l in 0..STENCIL {
                    if l != k {
                        num *= t - l as f64;
                        den *= k as f64 - l as f64;
                    }
                }
                *wk = num / den;
            }
        }
        Self {
            base,
            weights,
            outside: false,
        }
    }

    /// Applies the stencil to values at `r_0..=r_n`.
    pub fn apply(&self, full: &[f64]) -> f64 {
        if self.outside {
            return 0.0;
        }
        let n = full.len() as isize - 1;
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let idx = (self.base + k as isize).abs();
            if idx <= n {
                acc += w * full[idx as usize];
            }
        }
        acc
    }

    pub fn apply_profile(&self, f: &RadialProfile) -> f64 {
        if self.outside {
            return 0.0;
        }
        let n = f.grid.len() as isize;
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let idx = (self.base + k as isize).abs();
            if idx <= n {
                acc += w * f.at(idx as usize);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize) -> RadialProfile {
        let g = RadialGrid::new(12.0, n).unwrap();
        RadialProfile::from_fn(g, |r| (-r * r).exp()).unwrap()
    }

    #[test]
    fn integrates_gaussian_moments() {
        let f = gaussian(512);
        // ∫ e^{-|y|²} dy = π, ∫ |y|² e^{-|y|²} dy = π, fourth-order error.
        let e0 = (integrate_radial(&f, 0).unwrap() - PI).abs();
        let e2 = (integrate_radial(&f, 2).unwrap() - PI).abs();
        assert!(e0 < 1e-7 && e2 < 1e-7);
        let fine = gaussian(1024);
        assert!(e0 / (integrate_radial(&fine, 0).unwrap() - PI).abs() > 15.0);
    }

    #[test]
    fn low_degree_polynomials_are_exact() {
        let g = RadialGrid::new(25.0, 4096).unwrap();
        // 2π ∫₀^R (1 + r + r²) r dr
        let f = RadialProfile::from_fn(g, |r| 1.0 + r + r * r).unwrap();
        let big_r: f64 = 25.0;
        let exact = 2.0 * PI * (big_r.powi(2) / 2.0 + big_r.powi(3) / 3.0 + big_r.powi(4) / 4.0);
        assert!((integrate_radial(&f, 0).unwrap() / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn odd_node_count_uses_three_eighths_panel() {
        let f = gaussian(511);
        assert!((integrate_radial(&f, 0).unwrap() - PI).abs() < 1e-7);
    }

    #[test]
    fn interpolation_is_accurate_and_even() {
        let f = gaussian(1024);
        for &r in &[0.0, 0.003, 0.5, 1.234_567, 3.9] {
            assert!((f.eval(r) - (-r * r).exp()).abs() < 1e-12, "r = {r}");
        }
        assert_eq!(f.eval(12.5), 0.0);
        assert_eq!(f.eval(0.0), 1.0);
    }

    #[test]
    fn derivative_is_fourth_order() {
        let err = |n: usize| {
            let f = gaussian(n);
            let d = f.derivative();
            (0..=n)
                .map(|i| {
                    let r = f.grid.r(i);
                    (d.at(i) + 2.0 * r * (-r * r).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(256) / err(512);
        assert!(ratio > 14.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_non_finite() {
        let g = RadialGrid::new(1.0, 16).unwrap();
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(
            RadialProfile::new(g, 0.0, v),
            Err(Error::NonFinite { index: 4 })
        ));
    }
}

/// Precomputed interpolation stencils from a radial grid onto the nodes of a
/// Cartesian grid, for sampling several radial profiles at once.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    grid: super::CartesianGrid,
    stencils: Vec<RadialStencil>,
}

impl RadialSampler {
    pub fn new(radial: &RadialGrid, grid: super::CartesianGrid) -> Self {
        let m = grid.m();
        let mut stencils = Vec::with_capacity(grid.len());
        for i in 0..m {
            for j in 0..m {
                let y = grid.point(i, j);
                stencils.push(RadialStencil::new(radial, y[0].hypot(y[1])));
            }
        }
        Self { grid, stencils }
    }

    pub fn grid(&self) -> super::CartesianGrid {
        self.grid
    }

    /// Values of the profile at every node, row-major.
    pub fn sample_real(&self, f: &RadialProfile) -> Vec<f64> {
        let full = f.full();
        self.stencils.iter().map(|s| s.apply(&full)).collect()
    }

    pub fn sample(&self, f: &RadialProfile) -> super::Field2D {
        super::Field2D {
            grid: self.grid,
            values: self
                .sample_real(f)
                .into_iter()
                .map(|v| num_complex::Complex64::new(v, 0.0))
                .collect(),
        }
    }
}
