//! Experiment runner: scenario configs, one runner per figure, and
//! checksummed run manifests.

pub mod config;
pub mod error;
pub mod manifest;
pub mod runners;

pub use config::{Overrides, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use manifest::{run_and_write, verify, RunManifest, VerifyReport};
pub use runners::{execute, Command, DecorrPacking, OutputFile, SnrPreset};
