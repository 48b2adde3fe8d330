//! Error type shared across the library.

use thiserror::Error;

/// Errors raised by accounting, sampling, and verification routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation has no certified answer for these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical budget (samples, quadrature range, iterations) cannot
    /// meet the requested tolerance.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// The numerator distribution carries mass where the reference has none.
    #[error("degenerate support: numerator mass {offending_mass:.3e} sits on empty reference bins (tolerance {tolerance:.1e})")]
    DegenerateSupport {
        offending_mass: f64,
        tolerance: f64,
    },

    /// A trajectory left the representable range; the run was truncated.
    #[error("numerical overflow at step {step}: jump magnitude {magnitude:.3e}")]
    Overflow { step: usize, magnitude: f64 },

    /// Configuration input could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure, carried as text so the error stays `Clone`.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
