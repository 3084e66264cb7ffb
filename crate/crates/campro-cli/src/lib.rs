//! Batch driver binding the prompt, wavelet, fusion, metric, and cache
//! machinery into dataset-scale commands.
//!
//! Commands are deterministic given (manifest, config, seed): items are
//! processed by a fan-out worker pool but merged in manifest order, so
//! reruns and worker-count changes produce byte-identical tables. A bad
//! item never aborts a batch; it is reported and counted, and the exit
//! status reflects whether anything failed.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod table;

pub use config::{Protocol, RunConfig, TableFormat};
pub use manifest::{DatasetManifest, ManifestError, PairedEntry};
