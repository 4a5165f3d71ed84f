use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid event: {0}")]
    Event(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("capacity exceeded: {what} count {count} exceeds cap {cap}")]
    Capacity { what: &'static str, count: String, cap: u64 },

    #[error("box is not a vertex (tight-row rank {rank} < {required})")]
    NotAVertex { rank: usize, required: usize },

    #[error("no separation exists for classical vertices: every entry is integral")]
    NoSeparation,

    #[error("invalid game: {0}")]
    Game(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Capacity errors are operational limits rather than bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
