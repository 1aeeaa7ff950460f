use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ray: {0}")]
    InvalidRay(String),
    #[error("ray {0} is not in the Peres set")]
    NotInPeresSet(String),
    #[error("invalid symmetry matrix {0}")]
    InvalidSymmetry(String),
    #[error("invalid colouring: {0}")]
    InvalidColouring(String),
    #[error("walkthrough seed rejected: {0}")]
    InvalidSeed(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("event union members {0} and {1} are not syntactically disjoint")]
    OverlappingUnion(usize, usize),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("sample space of size {size} exceeds the enumeration bound {bound}")]
    SpaceTooLarge { size: usize, bound: usize },
    #[error("direction is not a unit vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("scan budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
