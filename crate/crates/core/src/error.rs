use thiserror::Error;

/// Errors raised by the numerical kernels and the scenario runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The query point lies on (or within the tolerance of) the path.
    #[error("point lies within {tolerance:e} of the path (distance {distance:e})")]
    PointOnPath { distance: f64, tolerance: f64 },

    /// A field was evaluated inside the excluded region around a source.
    #[error("singular evaluation: distance {distance:e} is not above {tolerance:e}")]
    SingularPoint { distance: f64, tolerance: f64 },

    #[error("quadrature did not converge within {cap} segments (last change {last_change:e})")]
    NoConvergence { cap: usize, last_change: f64 },

    #[error("finite-difference step {step:e} underflowed for scale {scale:e}")]
    StepUnderflow { step: f64, scale: f64 },

    /// Relative phase requested against a branch with (numerically) zero amplitude.
    #[error("branch amplitude {modulus:e} is too small to define a relative phase")]
    ZeroBranch { modulus: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Scenario configuration failed validation; `field` is a dotted path into the document.
    #[error("invalid config at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
