use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the operation's domain (empty cut side, t > |Ē|, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive oracle asked to run past its enumeration bound.
    #[error("capacity error: {what} is limited to n <= {limit}, got n = {n}")]
    Capacity {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    /// A node program broke the CONGEST contract.
    #[error("protocol violation by node {node} in round {round}: {reason}")]
    Protocol {
        node: u64,
        round: usize,
        reason: String,
    },

    #[error("incomplete run: {undecided} node(s) still undecided")]
    IncompleteRun { undecided: usize },

    /// A distributed rejection whose witness failed re-verification.
    #[error("internal soundness error: {0}")]
    Soundness(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
