//! Command-line front end: experiment configs, report runners and SVG figures.

pub mod config;
pub mod run;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{RunError, Status};
