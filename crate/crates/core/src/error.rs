use thiserror::Error;

use crate::graph::Edge;

/// Errors raised by the game model and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("graph must have at least one agent")]
    EmptyGraph,
    #[error("edge {edge} references an agent outside 1..={n}")]
    AgentOutOfRange { edge: Edge, n: usize },
    #[error("self-loop at agent {}", .0 + 1)]
    SelfLoop(usize),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has {count} edges, at most {max} are supported")]
    TooManyEdges { count: usize, max: usize },
    #[error("edge {0} is not in the base graph")]
    EdgeNotInBase(Edge),
    #[error("state vector has length {got}, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("state entry {} is not finite", .0 + 1)]
    NonFiniteState(usize),
    #[error("no weight defined for edge {0}")]
    MissingWeight(Edge),
    #[error("weight on edge {0} must be positive")]
    NonPositiveWeight(Edge),
    #[error("weights at agent {} sum to {sum}, must be below 1", .agent + 1)]
    RowSumTooLarge { agent: usize, sum: f64 },
    #[error("invalid player parameters: {0}")]
    InvalidPlayer(String),
    #[error("belief tie value alpha = {0} must lie in (0, 0.5)")]
    InvalidAlpha(f64),
    #[error("budget violated: spending {spent} exceeds available {available}")]
    BudgetViolation { spent: f64, available: f64 },
    #[error("edge pool of size {pool} exceeds the enumeration cap {cap}")]
    EnumerationCap { pool: usize, cap: usize },
    #[error("equilibrium search over {profiles} profile checks exceeds the limit {limit}")]
    SearchTooLarge { profiles: u128, limit: u128 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
