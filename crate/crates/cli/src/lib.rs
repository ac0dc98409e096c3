//! Experiment driver for federated ABC-GMM oversampling.

pub mod aggregate;
pub mod commands;
pub mod config;
pub mod pipeline;
pub mod streams;
