use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::fft::fft2;
use super::CartesianGrid;
use crate::{Error, Result};

/// Complex field sampled on a [`CartesianGrid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: CartesianGrid,
    pub values: Vec<Complex64>,
}

/// Norms of a field; `h1` is `(‖f‖² + ‖∇f‖²)^{1/2}` with spectral gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    Gradient,
    Laplacian,
    /// `Λf = f + y·∇f`.
    Scaling,
}

#[derive(Debug, Clone)]
pub enum Derivative {
    Gradient([Field2D; 2]),
    Laplacian(Field2D),
    Scaling(Field2D),
}

impl Field2D {
    pub fn zeros(grid: CartesianGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_values(grid: CartesianGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.m(),
                grid.m()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: CartesianGrid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let m = grid.m();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..m {
            for j in 0..m {
                values.push(f(grid.point(i, j)));
            }
        }
        Self { grid, values }
    }

    pub fn from_real_fn(grid: CartesianGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |y| Complex64::new(f(y), 0.0))
    }

    pub fn m(&self) -> usize {
        self.grid.m()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.m() + j]
    }

    pub fn check_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    /// Returns a copy with every value mapped through `f(y, value)`.
    pub fn map(&self, f: impl Fn([f64; 2], Complex64) -> Complex64) -> Self {
        let m = self.m();
        let mut out = self.clone();
        for i in 0..m {
            for j in 0..m {
                let y = self.grid.point(i, j);
                out.values[i * m + j] = f(y, self.values[i * m + j]);
            }
        }
        out
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field2D, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert!(self.grid.same_as(&other.grid), "fields live on different grids");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Multiplication by the coordinate `y_axis`.
    pub fn times_coord(&self, axis: usize) -> Self {
        self.map(|y, v| v * y[axis])
    }

    /// Multiplication by `|y|²`.
    pub fn times_r2(&self) -> Self {
        self.map(|y, v| v * (y[0] * y[0] + y[1] * y[1]))
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn real_part(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        }
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.values.clone();
        fft2(&mut s, self.m(), false);
        s
    }

    pub fn from_spectrum(grid: CartesianGrid, mut spectrum: Vec<Complex64>) -> Self {
        fft2(&mut spectrum, grid.m(), true);
        Self {
            grid,
            values: spectrum,
        }
    }

    /// Applies the Fourier multiplier `symbol(k1, k2)`.
    pub fn fourier_multiply(&self, symbol: impl Fn(f64, f64) -> Complex64) -> Self {
        let s = self.spectrum();
        Self::from_spectrum(self.grid, multiply_spectrum(&self.grid, &s, symbol))
    }

    pub fn gradient(&self) -> [Field2D; 2] {
        let s = self.spectrum();
        let g = self.grid;
        let d = |axis: usize| {
            let spec = multiply_indexed(&g, &s, |i, j| {
                let k = if axis == 0 {
                    g.derivative_wavenumber(i)
                } else {
                    g.derivative_wavenumber(j)
                };
                Complex64::new(0.0, k)
            });
            Self::from_spectrum(g, spec)
        };
        [d(0), d(1)]
    }

    pub fn laplacian(&self) -> Self {
        self.fourier_multiply(|k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
    }

    /// `Λf = f + y·∇f`.
    pub fn scaling_generator(&self) -> Self {
        let [g1, g2] = self.gradient();
        let m = self.m();
        let mut out = self.clone();
        for i in 0..m {
            for j in 0..m {
                let y = self.grid.point(i, j);
                let k = i * m + j;
                out.values[k] += g1.values[k] * y[0] + g2.values[k] * y[1];
            }
        }
        out
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Sup norm over the central square `|y_j - c_j| <= fraction · L`.
    pub fn sup_norm_core(&self, fraction: f64) -> f64 {
        let m = self.m();
        let c = self.grid.center();
        let lim = fraction * self.grid.half_width() * (1.0 + 1e-12);
        let mut s = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let y = self.grid.point(i, j);
                if (y[0] - c[0]).abs() <= lim && (y[1] - c[1]).abs() <= lim {
                    s = s.max(self.values[i * m + j].norm());
                }
            }
        }
        s
    }

    /// `∫ f` over the box.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_area()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: Complex64, other: &Field2D) {
        assert!(self.grid.same_as(&other.grid), "fields live on different grids");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }
}

fn multiply_spectrum(
    g: &CartesianGrid,
    s: &[Complex64],
    symbol: impl Fn(f64, f64) -> Complex64,
) -> Vec<Complex64> {
    multiply_indexed(g, s, |i, j| symbol(g.wavenumber(i), g.wavenumber(j)))
}

fn multiply_indexed(
    g: &CartesianGrid,
    s: &[Complex64],
    symbol: impl Fn(usize, usize) -> Complex64,
) -> Vec<Complex64> {
    let m = g.m();
    let mut out = s.to_vec();
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] *= symbol(i, j);
        }
    }
    out
}

impl Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<Complex64> for &Field2D {
    type Output = Field2D;
    fn mul(self, c: Complex64) -> Field2D {
        self.scale(c)
    }
}

impl Mul<f64> for &Field2D {
    type Output = Field2D;
    fn mul(self, c: f64) -> Field2D {
        self.scale_real(c)
    }
}

/// `⟨f, g⟩ = ∫ f ḡ`.
pub fn inner(f: &Field2D, g: &Field2D) -> Result<Complex64> {
    f.check_grid(g)?;
    let mut acc = Complex64::default();
    for (k, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        let p = a * b.conj();
        if !(p.re.is_finite() && p.im.is_finite()) {
            return Err(Error::NonFinite { index: k });
        }
        acc += p;
    }
    Ok(acc * f.grid.cell_area())
}

pub fn norms(f: &Field2D) -> Norms {
    let l2 = f.norm_l2();
    let s = f.spectrum();
    let g = f.grid;
    let m = g.m();
    // Parseval: ∫|∇f|² = h² / m² Σ |k|² |f̂|².
    let mut grad = 0.0;
    for i in 0..m {
        for j in 0..m {
            let k1 = g.derivative_wavenumber(i);
            let k2 = g.derivative_wavenumber(j);
            grad += (k1 * k1 + k2 * k2) * s[i * m + j].norm_sqr();
        }
    }
    grad *= g.cell_area() / (m * m) as f64;
    Norms {
        l2,
        h1: (l2 * l2 + grad).sqrt(),
        linf: f.sup_norm(),
    }
}

pub fn differentiate(f: &Field2D, kind: DerivativeKind) -> Derivative {
    match kind {
        DerivativeKind::Gradient => Derivative::Gradient(f.gradient()),
        DerivativeKind::Laplacian => Derivative::Laplacian(f.laplacian()),
        DerivativeKind::Scaling => Derivative::Scaling(f.scaling_generator()),
    }
}
