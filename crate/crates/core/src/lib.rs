//! Combinatorial bandits over monotone submodular rewards: set-function
//! oracles, a noisy environment, explore-then-commit style policies, regret
//! accounting and an experiment runner.

pub mod analysis;
pub mod environment;
pub mod error;
pub mod experiment;
pub mod policies;
pub mod set_function;

pub use error::{Error, Result};
