//! Numerical core for minimal-mass blow-up of the inhomogeneous cubic NLS
//!
//! `i u_t + Δu = -k(x)|u|²u` on ℝ², with the ground state, the linearized
//! operators around it, the approximate blow-up profile, the formal modulation
//! system, a split-step solver with geometric decomposition and the Lyapunov
//! functional used to control the remainder.

pub mod error;
pub mod groundstate;
pub mod linop;
pub mod lyapunov;
pub mod modulation;
pub mod nlssim;
pub mod numerics;
pub mod profile;

pub use error::{Error, Result};
pub use num_complex::Complex64;
