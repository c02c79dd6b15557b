//! Command-line front end and figure rendering for `secular-core`.

pub mod cli;
pub mod render;

pub use cli::cli_main;
