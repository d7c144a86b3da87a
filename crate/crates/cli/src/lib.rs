//! Batch driver for the deformed-laguerre pipeline: configs, subcommands, manifests.

pub mod app;
pub mod commands;
pub mod config;
pub mod output;
