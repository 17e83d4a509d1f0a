//! Command-line front end: run files, snapshot and probe writers, and the
//! `dscflow` argument handling.

pub mod app;
pub mod config;
pub mod output;

pub use app::run_cli;
