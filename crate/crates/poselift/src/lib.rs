//! File formats and the batch command line for `poselift`.
//!
//! The numerical work lives in [`poselift_core`]; this crate reads and
//! writes the on-disk artifacts (skeletons, calibrations, pose archives,
//! reports, cluster and map files, augmentation manifests) and wires them
//! into the `poselift` binary.

pub mod archive;
pub mod artifacts;
pub mod calib;
pub mod cli;
mod error;
pub mod manifest;
pub mod report;
pub mod skeleton_file;
mod write;

pub use error::{IoError, Location};
pub use write::write_atomic;

pub use poselift_core as core;
