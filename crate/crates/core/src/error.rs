use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid position: {0}")]
    InvalidPosition(String),
    #[error("rule not applicable: {0}")]
    RuleNotApplicable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed projection: {0}")]
    MalformedProjection(String),
    #[error("malformed proof: {0}")]
    MalformedProof(String),
    #[error("core does not fit the trace: {0}")]
    CoreMismatch(String),
    #[error("witness instantiations overlap, instantiate the core instead: {0}")]
    RedirectToInstantiation(String),
    #[error("refinement loop: {0}")]
    RefinementLoop(String),
    #[error("resource limit reached: {0}")]
    ResourceOut(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
