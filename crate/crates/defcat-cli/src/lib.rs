//! Document loading, command dispatch and reporting for the `defcat` tool.

pub mod commands;
pub mod document;

pub use commands::{run, CommandError, Flags, Report, COMMANDS};
pub use document::{load, load_str, LoadError, WorkspaceDocument};
