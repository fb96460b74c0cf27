//! Command-line experiment runner: JSON configs in, deterministic reports out.

pub mod app;
pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod report;

pub use app::{execute, load_config, Cli};
pub use commands::{run, Settings};
pub use config::{apply_override, Command, ExperimentConfig, Format, Params, Thresholds};
pub use emit::{emit, render, render_csv};
pub use error::CliError;
pub use report::{digest, Check, Estimate, Relation, Report};
