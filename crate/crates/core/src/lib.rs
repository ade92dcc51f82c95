//! Calibration on a finite forecast grid. Forecasters and natures play the
//! randomized point game or the two-choice interval game; direction games
//! decide approachability of the ε-ball.

pub mod approachability;
pub mod engine;
pub mod error;
pub mod forecasters;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod natures;

pub use error::{CalError, Result};
pub use grid::{BinStats, CalState, Grid};
