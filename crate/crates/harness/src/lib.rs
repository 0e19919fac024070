//! Scenario registry, run configuration, ensembles, CSV and checkpoint I/O
//! for the surface Navier-Stokes solver in `surfns-core`.

pub mod checkpoint;
pub mod checks;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod report;
pub mod runner;
pub mod scenarios;

pub use config::Config;
pub use error::{HarnessError, Result};
pub use report::RunReport;
pub use runner::{execute, Execution, RunOptions};
