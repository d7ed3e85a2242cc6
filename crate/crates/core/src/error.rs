use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("shooting bracket [{lo}, {hi}] does not separate over- and undershoot")]
    ShootingBracket { lo: f64, hi: f64 },

    #[error("ground state residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    GroundStateResidual { residual: f64, tol: f64 },

    #[error("ground state is not positive and decreasing at r = {r}")]
    GroundStateShape { r: f64 },

    #[error("invalid harmonic index {0}")]
    InvalidHarmonic(u32),

    #[error("compatibility defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    Incompatible { defect: f64, tol: f64 },

    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        solver: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("coefficient k must be positive at alpha = ({0}, {1})")]
    NonPositiveK(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decomposition failed: residuals {residuals:?}")]
    DecompositionFailed { residuals: [f64; 7] },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

pub type Result<T> = std::result::Result<T, Error>;
