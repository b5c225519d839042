//! Configuration, artifact formats and the end-to-end pipeline behind the
//! `cint` command.

pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{CliError, ConfigError};
pub use pipeline::{run_pipeline, PipelineOutcome, RunManifest};
