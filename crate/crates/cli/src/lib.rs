//! Batch runs over the radial biharmonic Schrödinger core: configuration,
//! dispatch, manifests and data files.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use commands::{run, Command, RunError};
pub use config::{resolve, ConfigError, InitSpec, RunConfig};
pub use manifest::RunManifest;
