//! File formats, experiment harness, and command implementations for
//! the `nnk` binary. Kept as a library so integration tests can drive
//! the same code paths the binary uses.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod io;

pub use error::CliError;
