use thiserror::Error;

use crate::model::{ArbitrageWitness, NodeId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("node ({}, {}) is outside a {periods}-period lattice", node.time, node.up_count)]
    NodeOutOfRange { node: NodeId, periods: usize },

    /// The model violates `0 < d < 1 + r < u`; the witness is a zero-cost
    /// portfolio that never loses and sometimes gains.
    #[error(
        "model admits arbitrage (requires 0 < d < 1+r < u); witness a={}, b={}, up={}, down={}",
        witness.shares, witness.bank, witness.up_value, witness.down_value
    )]
    ArbitrageModel { witness: ArbitrageWitness },

    #[error("perturbations must be non-negative, got ({up}, {down})")]
    NegativePerturbation { up: f64, down: f64 },

    #[error("path has {got} moves, expected {expected}")]
    PathLengthMismatch { expected: usize, got: usize },

    #[error("custom payoff table has no entry for node ({}, {})", node.time, node.up_count)]
    MissingPayoffEntry { node: NodeId },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("option matures after {option} periods but the model has {model}")]
    MaturityMismatch { option: usize, model: usize },

    #[error("floor lattice covers {floors} periods but the model has {model}")]
    FloorShapeMismatch { floors: usize, model: usize },

    #[error("invalid floor lattice: {0}")]
    InvalidFloors(String),

    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    #[error("initial wealth must be non-negative, got {0}")]
    NegativeWealth(f64),

    #[error("check requires a non-negative interest rate, got r = {0}")]
    RequiresNonnegativeRate(f64),

    #[error("tree depth {depth} exceeds the enumeration limit of {limit}")]
    TreeTooDeep { depth: usize, limit: usize },
}
