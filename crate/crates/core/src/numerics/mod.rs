//! Grids, fields, quadrature, spectral derivatives and small linear algebra.

mod banded;
mod differences;
mod field;
mod fft;
mod grid;
mod radial;

pub use banded::{BandedLu, BandedMatrix};
pub use differences::derivative_nonuniform;
pub use field::{differentiate, inner, norms, Derivative, DerivativeKind, Field2D, Norms};
pub use grid::{CartesianGrid, RadialGrid};
pub use radial::{integrate_radial, RadialProfile, RadialSampler, RadialStencil};
pub(crate) use fft::fft2;
pub(crate) use radial::simpson_weights;
