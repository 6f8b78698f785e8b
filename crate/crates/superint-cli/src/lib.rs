//! Report orchestration for the verification engine.
//!
//! The library side of the command-line driver: a small line-based job
//! configuration format with flag overrides, a deterministic runner that
//! fans the configured jobs out over a thread pool and reduces them in a
//! fixed order, and a structural diff over the emitted JSON reports.

pub mod config;
pub mod diff;
pub mod runner;

pub use config::{parse_config_file, ConfigError, JobConfig, JobSpec, Overrides};
pub use diff::{diff_reports, DiffError};
pub use runner::{run, JobReport, Report, RunError};
