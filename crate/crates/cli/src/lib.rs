//! Batch front-end for the `ccilc` library: scenario files, CSV artifacts and
//! the `run`, `verify` and `bench` commands.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;
pub mod shapes;

pub use error::{CliError, CliResult};
