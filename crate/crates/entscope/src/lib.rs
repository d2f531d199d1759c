//! File formats, configuration, parallel drivers and the command line for
//! `entscope-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::AppError;
