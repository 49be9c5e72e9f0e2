//! Command-line front end: scenario files, replicated simulation runs,
//! load sweeps with crossover detection, trace replay and report output.

pub mod cli;
mod error;
pub mod experiment;
pub mod replay;
pub mod report;
pub mod scenario;

pub use error::{CliError, Result};
