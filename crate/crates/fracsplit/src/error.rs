//! Error types shared across the solver.

use thiserror::Error;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (β ∉ (0,1], t' > t, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data is malformed: dimension mismatch, non-finite values.
    #[error("invalid data: {0}")]
    Data(String),

    /// A quadrature did not reach the requested accuracy.
    #[error("quadrature accuracy not reached: {message} (achieved {achieved:.3e})")]
    Accuracy { message: String, achieved: f64 },

    /// The nonlinear flow left the admissible range (finite-time blow-up).
    #[error("solution blow-up at t = {time}{}", match grid_index {
        Some(i) => format!(" (grid point {i})"),
        None => String::new(),
    })]
    BlowUp {
        /// Last time at which the state was still finite and in range.
        time: f64,
        /// Offending grid point for field-level flows.
        grid_index: Option<usize>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
