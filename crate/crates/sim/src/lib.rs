//! Experiment harness for the `mmbcast-core` simulator: configuration,
//! network files, CSV artifacts and parameter sweeps.

pub mod config;
pub mod error;
pub mod experiment;
pub mod netfile;
pub mod sweep;

pub use config::{ExperimentConfig, MatrixKind};
pub use error::{Result, SimError};
pub use experiment::{run_experiment, RunSummary};
