//! Experiment runner for the polyshard simulator: config parsing, sweeps
//! with CSV output, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod sweep;
