//! Experiment runners behind the `expcli` binary.

pub mod config;
pub mod output;
pub mod runners;

pub use config::*;
pub use output::*;
pub use runners::*;
