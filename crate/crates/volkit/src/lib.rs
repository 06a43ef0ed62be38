//! Data ingestion, the simulation-study pipeline and the `volkit` command
//! line built on `roughvol`.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod study;

pub use error::{Error, Result};

/// Environment variable naming the directory relative `--data` paths are
/// resolved against.
pub const DATA_DIR_ENV: &str = "VOLKIT_DATA_DIR";
