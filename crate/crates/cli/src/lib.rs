//! Command-line front end for the Nüshu corpus-expansion toolkit.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::dispatch;
