use thiserror::Error;

/// Errors produced by this crate.
///
/// [`Error::kind`] classifies each variant as an input problem or a numerical
/// failure, which front ends map to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value violates a documented invariant.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// A time grid extends past the duration of the drive it samples.
    #[error("grid duration {grid_us} us exceeds drive duration {drive_us} us")]
    DurationMismatch { grid_us: f64, drive_us: f64 },

    /// A drive or config file does not match the documented schema.
    #[error("parse error: {0}")]
    Parse(String),

    /// A root search did not bracket a sign change.
    #[error("root search failed: {0}")]
    SearchFailure(String),

    /// Magnus quadrature only supports orders 1 through 3.
    #[error("unsupported Magnus order {0} for the quadrature path (max 3)")]
    UnsupportedOrder(usize),

    /// A matrix logarithm came too close to the branch cut.
    #[error("log branch risk: rotation angle {angle_rad:.4} rad exceeds {limit_rad:.4} rad")]
    BranchRisk { angle_rad: f64, limit_rad: f64 },

    /// Taylor-coefficient extraction residual exceeded its tolerance.
    #[error("ill-conditioned coefficient extraction: residual {0:.3e}")]
    Conditioning(f64),

    /// Phase requested for a component with negligible magnitude.
    #[error("phase undefined: component magnitude {0:.3e} below 1e-12")]
    UndefinedPhase(f64),

    /// Inputs outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No pair of non-parallel control axes exists.
    #[error("controllability failure: {0}")]
    Controllability(String),

    /// Weak-control amplitude guard cannot be satisfied.
    #[error("amplitude limit: {0}")]
    AmplitudeLimit(String),
}

/// Coarse classification for exit-code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed files, invalid flags, violated preconditions.
    Input,
    /// Numerical failure: searches, conditioning, branch cuts.
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation { .. }
            | Error::DurationMismatch { .. }
            | Error::Parse(_)
            | Error::UnsupportedOrder(_)
            | Error::Domain(_)
            | Error::UndefinedPhase(_)
            | Error::Controllability(_) => ErrorKind::Input,
            Error::SearchFailure(_)
            | Error::BranchRisk { .. }
            | Error::Conditioning(_)
            | Error::AmplitudeLimit(_) => ErrorKind::Numerical,
        }
    }

    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
