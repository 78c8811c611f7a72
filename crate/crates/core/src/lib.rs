//! Deep Q-learning for long-only portfolio trading.
//!
//! An agent is trained on single-asset environments drawn at random from a
//! universe, where investing is rewarded with the asset's next-period return
//! (net of entry cost) and holding cash is rewarded with the universe's mean
//! next-period return. At evaluation time an ensemble of agents decides per
//! asset and the invested assets form an equal-weight portfolio, which is
//! compared with buy-and-hold, momentum and reversion benchmarks.

pub mod backtest;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod features;
pub mod market_data;
pub mod panel;
pub mod qnet;
pub mod trainer;

pub use error::{Error, Result};
