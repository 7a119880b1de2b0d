//! Self-similar piston problems for a modified Chaplygin gas.

pub mod cli;
pub mod eos;
pub mod error;
pub mod exec;
pub mod fvm;
pub mod limits;
pub mod rarefaction;
pub mod roots;
pub mod setup;
pub mod shock;
pub mod solution;

pub use eos::{GasParams, Regime};
pub use error::{Error, Result};
pub use setup::{Direction, PistonProblem};
