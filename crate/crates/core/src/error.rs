use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("negative valuation for agent {agent}, item {item}")]
    NegativeValue { agent: usize, item: usize },
    #[error("instance has no agents")]
    EmptyAgents,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedMatrix {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("agent {0} is out of range")]
    UnknownAgent(usize),
    #[error("agent {agent} has a zero maximin share")]
    ZeroMms { agent: usize },
    #[error("bundle count must be at least 1")]
    ZeroBundles,
    #[error("{items} items exceed the oracle cap of {cap}")]
    TooLarge { items: usize, cap: usize },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("malformed allocation: {0}")]
    IncompleteAllocation(String),
    #[error("allocation is not a partition of the items: {0}")]
    NotAPartition(String),
    #[error("agent {agent} values the assigned bundle below the threshold")]
    BelowThreshold { agent: usize },
    #[error("agent {agent} is not in the update class")]
    NotInN21 { agent: usize },
    #[error("upper-bound update loop exceeded its cap of {cap} iterations")]
    IterationCapExceeded { cap: usize },
    #[error("bag filling ran out of filler items in round {round}")]
    Exhausted { round: usize },
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors that indicate a solver bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::BelowThreshold { .. }
                | Error::IterationCapExceeded { .. }
                | Error::Exhausted { .. }
                | Error::InvariantViolation(_)
        )
    }
}
