//! Command-line front end: system files, expression parsing, gate
//! evaluation, and report rendering for the invariant engine.

pub mod catalog;
pub mod document;
pub mod error;
pub mod expr;
pub mod gates;
pub mod report;
pub mod runner;

pub use error::{CliError, Result};
