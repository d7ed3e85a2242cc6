use std::f64::consts::PI;

use crate::{Error, Result};

/// Uniform radial grid `r_i = i h`, `i = 1..=n`, `h = r_max / n`.
///
/// The origin is not a node of the profile arrays; its value is carried
/// separately by [`RadialProfile`](super::RadialProfile).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        if n < 16 {
            return Err(Error::InvalidGrid(format!("need at least 16 radial nodes, got {n}")));
        }
        Ok(Self { r_max, n })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n as f64
    }

    /// Radius of node `i`, with `i = 0` the origin.
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// The nodes `r_1, ..., r_n`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n).map(move |i| self.r(i))
    }
}

/// Periodic square grid on `center + [-L, L)²` with `m × m` nodes.
///
/// Node `(i, j)` sits at `(c1 - L + i h, c2 - L + j h)` with `h = 2L / m`.
/// Fields are stored row-major with `i` (the first coordinate) as row index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    half_width: f64,
    m: usize,
    center: [f64; 2],
}

impl CartesianGrid {
    pub fn new(half_width: f64, m: usize) -> Result<Self> {
        Self::with_center(half_width, m, [0.0, 0.0])
    }

    pub fn with_center(half_width: f64, m: usize, center: [f64; 2]) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("m must be a power of two, got {m}")));
        }
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(Error::InvalidGrid("center must be finite".into()));
        }
        Ok(Self {
            half_width,
            m,
            center,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }

    /// Area element `h²`.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Coordinate of node `i` along axis `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.center[axis] - self.half_width + i as f64 * self.spacing()
    }

    /// Coordinates of node `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.coord(0, i), self.coord(1, j)]
    }

    /// Angular wavenumber of Fourier index `i`, in FFT order.
    pub fn wavenumber(&self, i: usize) -> f64 {
        let m = self.m as isize;
        let i = i as isize;
        let q = if i < m / 2 { i } else { i - m };
        q as f64 * PI / self.half_width
    }

    /// Wavenumber used for first derivatives: the Nyquist mode is dropped so
    /// derivatives of real fields stay real.
    pub(crate) fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.m / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// Same grid with a new half width and center, e.g. the rescaled frame.
    pub fn rescaled(&self, half_width: f64, center: [f64; 2]) -> Result<Self> {
        Self::with_center(half_width, self.m, center)
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        let tol = 1e-12 * self.half_width.max(other.half_width);
        self.m == other.m
            && (self.half_width - other.half_width).abs() <= tol
            && (self.center[0] - other.center[0]).abs() <= tol
            && (self.center[1] - other.center[1]).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(RadialGrid::new(10.0, 8).is_err());
        assert!(RadialGrid::new(-1.0, 64).is_err());
        assert!(CartesianGrid::new(8.0, 100).is_err());
        assert!(CartesianGrid::new(0.0, 64).is_err());
    }

    #[test]
    fn wavenumbers_follow_fft_order() {
        let g = CartesianGrid::new(PI, 8).unwrap();
        let k: Vec<f64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(g.derivative_wavenumber(4), 0.0);
    }

    #[test]
    fn coordinates_respect_center() {
        let g = CartesianGrid::with_center(2.0, 4, [1.0, -3.0]).unwrap();
        assert_eq!(g.point(0, 0), [-1.0, -5.0]);
        assert_eq!(g.point(2, 2), [1.0, -3.0]);
    }
}
