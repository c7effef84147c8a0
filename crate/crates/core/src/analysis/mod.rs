//! Corpus-level analysis: pose clustering for per-class evaluation and the
//! linear joint map used to retarget predictions onto another skeleton.

mod kmeans;
mod retarget;

pub use kmeans::{assign_classes, kmeans_poses, KMeansConfig, PoseClusters};
pub use retarget::{apply_retarget_map, fit_retarget_map, retarget_residual, RetargetMap, RetargetOptions};
