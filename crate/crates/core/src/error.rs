use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph size {0}: need at least 2 nodes")]
    InvalidSize(usize),
    #[error("invalid edge ({0}, {1}) for a graph with {2} nodes")]
    InvalidEdge(usize, usize, usize),
    #[error("edge list parse error on line {line}: {msg}")]
    EdgeListParse { line: usize, msg: String },
    #[error("node {0} has no neighbors")]
    NoNeighbor(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("node {0} is seeded with both messages")]
    SeedConflict(usize),
    #[error("seed node {0} is out of range")]
    SeedOutOfRange(usize),
    #[error("removal threshold must be at least 1, got {0}")]
    InvalidThreshold(u32),
    #[error("counts sum to {sum}, expected {n}")]
    InconsistentState { sum: u64, n: u64 },
    #[error("exact oracle supports n <= {max}, got {n}")]
    OracleScale { n: usize, max: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate split: initial holders sum to zero")]
    DegenerateSplit,
    #[error("update pair ({0}, {1}) must be two distinct nodes")]
    InvalidPair(usize, usize),
    #[error("power iteration did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("tie n1 = n2 = {0}: sign consensus bounds are vacuous")]
    DegenerateTie(usize),
}
