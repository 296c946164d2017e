//! Command-line entry points and the HTTP service for the legislative
//! graph engine.

pub mod api;
pub mod commands;
pub mod error;

pub use error::CliError;
