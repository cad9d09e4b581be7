//! Library side of the `rpv` command-line tool: file formats, report tables
//! and the subcommands.

pub mod commands;
pub mod error;
pub mod io;
pub mod table;

pub use error::{CliError, Result};
