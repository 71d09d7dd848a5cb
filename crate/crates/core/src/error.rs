use crate::logic::{AxiomId, LogicError, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(ParseError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("axiom {0} is not a possibly faulty axiom of this KB")]
    UnknownAxiom(AxiomId),
    #[error("test cases must contain at least one formula")]
    EmptyTestCase,
    #[error("axiom `{0}` occurs among both the faulty and the background axioms")]
    OverlappingAxiom(String),
    #[error("background knowledge and positive test cases alone violate the requirements; no diagnosis exists")]
    NoDiagnosis,
    #[error("the KB satisfies all requirements; there is nothing to localize")]
    NoViolation,
    #[error("no query exists: {0}")]
    NoQuery(String),
    #[error("invalid ground truth: {0}")]
    InvalidGroundTruth(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid answer: {0}")]
    InvalidAnswer(String),
    #[error("the session is already finished")]
    SessionFinished,
    #[error("the session is not finished yet")]
    SessionNotFinished,
    #[error("KB generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
