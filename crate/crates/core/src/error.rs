use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid probe placement: {0}")]
    InvalidPlacement(String),

    #[error("probe placement failure: {0}")]
    PlacementFailure(String),

    #[error("probe-peak association failed: {0}")]
    ProbeAssociation(String),

    #[error("no cracks detected (estimated rank 0)")]
    NoCracksDetected,

    #[error("probe peak not found: {0}")]
    ProbePeakNotFound(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
