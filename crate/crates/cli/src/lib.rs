//! Experiment runner: configs in, comparison tables and plot data out.

pub mod config;
pub mod error;
pub mod experiment;
pub mod params;
pub mod report;
pub mod spec;
pub mod suite;
pub mod theorems;

pub use error::{CliError, Result};
