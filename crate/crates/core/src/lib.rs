//! Tree-exploiting empirical game-theoretic analysis.
//!
//! Estimate extensive-form game models from noisy black-box simulation,
//! grow them with a policy-space response oracle loop, and measure how far
//! the resulting solutions are from equilibrium in the true game.

pub mod abstraction;
pub mod bounds;
pub mod estimation;
pub mod experiment;
pub mod game_tree;
pub mod games;
pub mod plot;
pub mod psro;
pub mod rng;
pub mod solvers;
pub mod stats;

pub use game_tree::{
    GameTree, InfosetId, NodeId, NodeKind, NodeSpec, PureProfile, PureStrategy, StrategyProfile,
    TreeBuilder, TreeError,
};
