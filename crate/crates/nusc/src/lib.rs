//! Experiment harness for the `nusc-core` simulation kernel: JSON configs,
//! plain-text table formats, CSV results with a reproducibility manifest,
//! and the `nusc` command line.

pub mod config;
pub mod error;
pub mod format;
pub mod harness;
pub mod registry;

pub use config::{ExperimentConfig, ExperimentKind, Loaded};
pub use error::{HarnessError, Result};
pub use harness::{run, RunOutput};
