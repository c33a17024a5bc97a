//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied argument or configuration value.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A quaternion too close to zero to normalize.
    #[error("degenerate quaternion: norm {norm:.3e} below minimum {min:.1e}")]
    DegenerateQuaternion { norm: f64, min: f64 },

    /// Rigid fit attempted on a degenerate point configuration.
    #[error("degenerate rigid fit: {0}")]
    DegenerateFit(String),

    /// Every optimizer init diverged; carries one diagnostic line per init.
    #[error("optimization failed: {message}")]
    OptimizationFailed {
        message: String,
        diagnostics: Vec<String>,
    },

    /// Malformed input file.
    #[error("malformed {kind} input at line {line}: {message}")]
    Format {
        kind: &'static str,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn format(kind: &'static str, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            kind,
            line,
            message: msg.into(),
        }
    }
}
