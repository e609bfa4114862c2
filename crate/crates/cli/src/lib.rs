//! Experiment runner for adaptive coupling-strength synchronization.
//!
//! Reads JSON experiment descriptions (or bundled presets), integrates them
//! with `adaptsync-core`, and writes trajectory CSV, run summaries and
//! optional SVG plots.

pub mod commands;
pub mod config;
pub mod matrix_io;
pub mod output;
pub mod presets;
pub mod run;
