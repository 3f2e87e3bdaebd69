use thiserror::Error;

use crate::ratio::Ratio;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("expected {lo} < {hi}")]
    NotIncreasing { lo: Ratio, hi: Ratio },
    #[error("{0} is outside [0, 1]")]
    OutOfUnitRange(Ratio),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} already belongs to Q*; use the membership witness instead of a Case-2 chain")]
    AlreadyInQStar(Ratio),
    #[error("invalid value block: {0}")]
    InvalidBlock(String),
    #[error("agent {0:?} has zero total weight")]
    ZeroWeightAgent(String),
    #[error("overlapping pieces: [{0}, {1}] and [{2}, {3}]")]
    OverlappingPieces(Ratio, Ratio, Ratio, Ratio),
    #[error("malformed division: {0}")]
    MalformedDivision(String),
    #[error("malformed formula: {0}")]
    MalformedFormula(String),
    #[error("formula has {vars} variables, brute force is capped at {max}")]
    TooManyVariables { vars: usize, max: usize },
    #[error("assignment is not exactly-1 satisfying")]
    NotSatisfying,
    #[error("division is not a valid solution: {0}")]
    NotASolution(String),
    #[error("invalid necklace: {0}")]
    InvalidNecklace(String),
    #[error("sub-solver gave up at its node limit during {stage}")]
    Inconclusive {
        stage: String,
        bound: Option<u64>,
        partial: Option<Box<crate::pipelines::PipelineTrace>>,
    },
    #[error("sub-solver reported no solution during {0}; this contradicts the existence theorem it relies on")]
    SubProblemInfeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
