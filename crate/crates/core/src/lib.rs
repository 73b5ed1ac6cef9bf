//! Discrete-time binomial option pricing and hedging.
//!
//! The market is a single asset that moves up by `u` or down by `d` each
//! period next to a bank account paying `r`. On top of that the crate
//! provides:
//!
//! - [`model`]: the market, lattice addressing and arbitrage detection,
//! - [`replication`]: one-step replication and minimal superhedging,
//! - [`pricing`]: European and American values, exercise advice and fair
//!   values under a real-world probability,
//! - [`analytics`]: parity and bound checks,
//! - [`optimization`]: one-period expected-value portfolio choice,
//! - [`oracle`]: brute-force references on the full binary tree.

pub mod analytics;
pub mod error;
pub mod model;
pub mod optimization;
pub mod oracle;
pub mod pricing;
pub mod replication;

pub use error::{Error, Result};
pub use model::{
    find_arbitrage, ArbitrageWitness, Lattice, ModelParams, Move, NodeId, RiskNeutralQ,
};
pub use pricing::{ExerciseStyle, OptionKind, OptionSpec, PayoffTable, ValueLattice};
pub use replication::{FloorLattice, HedgePlan, HedgePosition, TargetPair};
