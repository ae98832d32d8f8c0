//! File formats, configuration and the command-line pipeline around
//! `factorank-core`.

pub mod config;
pub mod csv_io;
pub mod pipeline;
pub mod report;

pub use config::PipelineConfig;
pub use pipeline::{execute, run, Command, Outcome, PipelineError, Results};
