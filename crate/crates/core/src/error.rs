use thiserror::Error;

/// Errors produced while building catalogs, assembling operators or solving.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid mode window: {0}")]
    InvalidWindow(String),

    #[error("mode {mode} outside window |m| <= {lambda}")]
    ModeOutsideWindow { mode: i32, lambda: i32 },

    #[error("basis would contain {required} states, exceeding the cap {cap}")]
    CapacityExceeded { required: u128, cap: usize },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("mask selects no states: {0}")]
    EmptyMask(String),

    #[error("operator not Hermitian (residual {residual:.3e} > {tolerance:.3e})")]
    NonHermitian { residual: f64, tolerance: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension {dim} above dense threshold {threshold}")]
    AboveDenseThreshold { dim: usize, threshold: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
