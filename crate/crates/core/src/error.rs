use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid information structure: {0}")]
    InvalidStructure(String),
    #[error("signal index {index} out of range for {n} signals")]
    SignalIndex { index: usize, n: usize },
    #[error("partitions are over different supports ({left} vs {right} points)")]
    SupportMismatch { left: usize, right: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid garbling: {0}")]
    InvalidGarbling(String),
    #[error("invalid decision problem: {0}")]
    InvalidDecision(String),
    #[error("scoring rule expects {rule} outcomes but the event has {structure}")]
    OutcomeMismatch { structure: usize, rule: usize },
    #[error("expected score function is not convex: {0}")]
    NotConvex(String),
    #[error("{what}: size {size} exceeds cap {cap} ({cost})")]
    CapExceeded { what: &'static str, size: usize, cap: usize, cost: String },
    #[error("unbounded scores: {0}")]
    Unbounded(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("set function is not monotone: f({subset}) > f({subset} + {element})")]
    NotMonotone { subset: String, element: usize },
    #[error("refused: {0}")]
    Refused(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("invalid market game: {0}")]
    InvalidGame(String),
    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
