//! Shapley values for knapsack budgeted games and for games with a
//! decomposable value algorithm.
//!
//! * [`vector_dp`]: exact values for knapsack games, polynomial in the
//!   number of agents for a fixed bin size.
//! * [`rounding`]: additive `ε·w_max` approximation by weight rounding.
//! * [`greedy`]: the greedy-heuristic knapsack game.
//! * [`engine`] and [`catalog`]: generic counting engines over
//!   setup/update/final decompositions, with weighted majority, MC-net,
//!   multi-issue, top-k and greedy instantiations.
//! * [`oracle`]: brute-force and Monte Carlo baselines.
//! * [`cli`]: instance and result file formats behind the `kshap` binary.

pub mod axioms;
pub mod catalog;
pub mod cli;
pub mod engine;
pub mod error;
pub mod game;
pub mod greedy;
pub mod knapsack;
pub mod oracle;
pub mod random;
pub mod rational;
pub mod rounding;
pub mod shapley;
pub mod table;
pub mod vector_dp;

pub use error::{Error, Result};
pub use game::{AgentId, Coalition, ValueFunction};
pub use knapsack::{Agent, GameInstance, ValueVector};
pub use shapley::{Algorithm, ShapleyResult};
