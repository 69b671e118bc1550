use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("group velocity {0} is not strictly subluminal")]
    Superluminal(f64),

    #[error("boost velocity {0} must satisfy |v| < 1")]
    InvalidBoost(f64),

    #[error("length mismatch: {waves} waves but {phases} phases")]
    LengthMismatch { waves: usize, phases: usize },

    /// The coherent sum in a weak-value denominator vanished to working
    /// precision; the caller is expected to redraw.
    #[error("degenerate weak-value denominator ({0:e})")]
    Degenerate(f64),

    #[error("degenerate redraw rate {rate:.4} exceeds the 1% limit ({redraws} redraws for {samples} samples)")]
    RedrawLimit { redraws: u64, samples: u64, rate: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
