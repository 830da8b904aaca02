//! Exact solver, strategy verifier and bound calculus for the counterfeit
//! coins problem with several sets, each holding one lighter coin.

pub mod bounds;
pub mod family;
pub mod model;
pub mod representability;
pub mod solver;
pub mod strategy;

pub use model::{Candidate, CandidateSet, CoinId, Instance, ModelError, Outcome, Weighing};
pub use strategy::{Strategy, StrategyTree};
