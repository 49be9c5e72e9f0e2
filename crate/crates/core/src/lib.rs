//! Queueing models and a discrete-event simulator for deciding when a
//! geo-distributed edge deployment delivers worse end-to-end latency than a
//! pooled cloud deployment.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: seedable random streams and inter-arrival/service
//!   distributions with controllable mean and squared coefficient of variation.
//! * [`analytic`]: closed-form waiting-time models (Erlang-C, Allen-Cunneen),
//!   inversion thresholds, cutoff utilizations and capacity formulas.
//! * [`workload`]: arrival-stream generation, spatial splitting and
//!   per-minute trace replay.
//! * [`simulator`]: FCFS multi-server stations behind additive network RTTs.

pub mod analytic;
pub mod distributions;
mod error;
pub mod simulator;
pub mod workload;

pub use error::{Error, Result};
