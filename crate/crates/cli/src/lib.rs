//! Experiment harness around the `aisfem` core. It resolves configuration
//! and problem files, runs the experiment subcommands and plots to SVG.

pub mod commands;
pub mod config;
pub mod plot;
pub mod problem;
