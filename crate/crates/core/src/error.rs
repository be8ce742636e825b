use thiserror::Error;

/// Errors raised by the kaon Bell engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("negative evolution time {0} (evolution only runs forward)")]
    NegativeTime(f64),

    #[error("survival norm underflowed at t = {0}; cap the scan range")]
    NormUnderflow(f64),

    #[error("state vector is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("density matrix rejected: {0}")]
    InvalidState(String),

    #[error("empty scan range [{lo}, {hi}] with step {step}")]
    EmptyRange { lo: f64, hi: f64, step: f64 },

    #[error("no events recorded for setting pair ({0}, {1})")]
    MissingCell(String, String),

    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
