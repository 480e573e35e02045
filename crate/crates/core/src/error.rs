use thiserror::Error;

/// Broad classes of failure, used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input or a violated precondition.
    Contract,
    /// A request that is well formed but too large to run.
    Capacity,
    /// A statistical experiment could not be carried out.
    Experiment,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid job {index}: {reason}")]
    InvalidJob { index: usize, reason: String },

    #[error("an instance needs at least one job")]
    EmptyInstance,

    #[error("schedule has {got} entries but the instance has {expected} jobs")]
    ScheduleLength { expected: usize, got: usize },

    #[error("schedule is not a permutation: {0}")]
    NotAPermutation(String),

    #[error("position {position} is out of range for {n} jobs")]
    PositionOutOfRange { position: usize, n: usize },

    #[error("invalid epsilon {0:?}: expected a positive rational literal like 1/3")]
    InvalidEpsilon(String),

    #[error("placement is inconsistent with the instance: {0}")]
    InconsistentPlacement(String),

    #[error("instance parse error: {0}")]
    Parse(String),

    #[error("enumeration of {count} placements exceeds the cap of {cap}; reduce n or raise epsilon")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("step budget {budget} exceeds the cap of {cap}; supply an explicit max-steps override")]
    BudgetTooLarge { budget: u128, cap: u128 },

    #[error("exhaustive search over {n} jobs exceeds the cap of {cap}")]
    InstanceTooLargeForExact { n: usize, cap: usize },

    #[error("no placement yields a full Jackson schedule")]
    NoValidPlacement,

    #[error("placement admits no full Jackson schedule; absorption is undefined")]
    InvalidPlacementForAbsorption,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::EnumerationTooLarge { .. }
            | Error::BudgetTooLarge { .. }
            | Error::InstanceTooLargeForExact { .. } => ErrorClass::Capacity,
            Error::NoValidPlacement | Error::InvalidPlacementForAbsorption | Error::Io(_) => ErrorClass::Experiment,
            _ => ErrorClass::Contract,
        }
    }

    /// Stable machine-readable name of the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidJob { .. } => "InvalidJob",
            Error::EmptyInstance => "EmptyInstance",
            Error::ScheduleLength { .. } => "ScheduleLength",
            Error::NotAPermutation(_) => "NotAPermutation",
            Error::PositionOutOfRange { .. } => "PositionOutOfRange",
            Error::InvalidEpsilon(_) => "InvalidEpsilon",
            Error::InconsistentPlacement(_) => "InconsistentPlacement",
            Error::Parse(_) => "ParseError",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::BudgetTooLarge { .. } => "BudgetTooLarge",
            Error::InstanceTooLargeForExact { .. } => "InstanceTooLargeForExact",
            Error::NoValidPlacement => "NoValidPlacement",
            Error::InvalidPlacementForAbsorption => "InvalidPlacementForAbsorption",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
