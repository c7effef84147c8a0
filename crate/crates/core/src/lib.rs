//! Non-learned numerical core for monocular 3D human pose estimation.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`skeleton`]: kinematic skeleton definitions and the derived parent tables.
//! * [`representations`]: root-relative and parent-relative pose encodings and
//!   per-joint affine fusion of several estimates.
//! * [`geometry`]: weak-perspective projection, closed-form global translation,
//!   perspective correction and global pose composition.
//! * [`metrics`]: MPJPE, 3DPCK, AUC, Procrustes-style alignment and bucketed
//!   evaluation reports.
//! * [`analysis`]: pose K-means and linear skeleton retargeting.
//! * [`augment`]: mask-driven appearance augmentation on raw 8-bit buffers.
//! * [`synth`]: random human-like poses and camera scenes.
//!
//! Camera convention used throughout: right-handed, x right, y down, z forward.
//! The camera up axis is -y. All 3D quantities are millimeters, 2D are pixels.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod augment;
mod error;
pub mod geometry;
pub mod metrics;
mod pose;
pub mod representations;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
pub use pose::{Frame, Pose2D, Pose3D};
pub use skeleton::{build_skeleton, KinematicTree, SkeletonDef, SkeletonId};

pub use nalgebra::{Vector2, Vector3};
