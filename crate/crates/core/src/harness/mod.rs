//! Metrics and the Monte-Carlo experiment runner.

pub mod check;
pub mod experiment;
pub mod metrics;
pub mod runner;
