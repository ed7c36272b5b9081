//! Throughput models for checkpointing versus migration on large,
//! failure-prone clusters.
//!
//! Every time quantity in this crate is expressed in minutes. Throughputs
//! are machine-equivalents: the expected number of processors doing useful
//! work at any instant, so that `throughput / N` is the platform yield.
//!
//! The crate is split along the lines of the model:
//!
//! - [`failure`]: failure-time distributions and group MTBF for jobs spanning
//!   `2^k` processors.
//! - [`jobmix`]: steady-state mix of job sizes on a saturated platform.
//! - [`spares`]: spare-pool sizing for migration.
//! - [`throughput`]: closed-form throughput of checkpointing and migration.
//! - [`periodic`]: periodic checkpointing without failure prediction.
//! - [`sim`]: a seeded Monte Carlo simulator used to validate the formulas.
//! - [`scenario`] and [`report`]: preset scenarios and table emitters.

pub mod error;
pub mod failure;
pub mod jobmix;
pub mod periodic;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod spares;
pub mod special;
pub mod throughput;
pub mod units;

pub use error::{ModelError, Result};
pub use failure::{FailureModel, GroupMtbfRule};
pub use jobmix::JobMix;
pub use spares::{AvailabilityParams, SpareMethod, SpareSizing};
pub use throughput::{CostParams, ThroughputReport};
