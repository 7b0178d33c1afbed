//! Configuration parsing, single runs, parameter sweeps and dataset
//! reproduction on top of the `qbattery` solvers.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod reproduce;
pub mod run;
pub mod sweep;
pub mod table;

pub use config::{parse_config, Config, ConfigError, RunConfig, SweepConfig};
pub use reproduce::{reproduce, Figure, ReproduceError};
pub use run::{run_single, RunError};
pub use sweep::{run_sweep, SweepError, SweepReport};
pub use table::OutputTable;
