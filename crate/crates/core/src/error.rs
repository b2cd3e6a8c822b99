use thiserror::Error;

/// Errors raised across the lab.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed group, element, subgroup or residue vector.
    #[error("structural error: {0}")]
    Structural(String),

    /// Text input could not be parsed; `position` is a byte offset into the input.
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The representation does not satisfy the commutation relation or the
    /// central-character condition, so the classification does not apply.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// A candidate intertwiner is not a unimodular multiple of the synthesized one.
    #[error("uniqueness violation: {0}")]
    Uniqueness(String),

    /// Phase-space point is not on the sampling grid.
    #[error("off-grid phase-space point: {0}")]
    OffGrid(String),

    #[error("grid window too small: half-width {half_width} < required {required} (Gaussian tail requirement)")]
    WindowTooSmall { half_width: f64, required: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An identity that holds by construction failed; signals a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn parse(position: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: msg.into(),
        }
    }

    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_) => 3,
            Error::Uniqueness(_) | Error::Numerical(_) | Error::Internal(_) => 1,
            _ => 2,
        }
    }
}
