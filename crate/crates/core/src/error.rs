use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Refinement was exhausted before two successive estimates agreed.
    #[error("precision failure in {op}: {msg} (last={last}, previous={previous})")]
    Precision {
        op: &'static str,
        msg: String,
        last: String,
        previous: String,
    },

    #[error("data integrity: {0}")]
    DataIntegrity(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }
}
