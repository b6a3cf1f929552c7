//! Experiments, file formats and the `qpuf` command line on top of
//! `qpuf-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::Error;

/// Exit status of a demo whose reproduction failed the digest check.
pub const EXIT_TAMPER: i32 = 3;
