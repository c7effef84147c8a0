//! JSON files produced by `cluster`, `retarget`, `fuse` and `augment plan`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use poselift_core::analysis::{PoseClusters, RetargetMap};
use poselift_core::augment::{AugmentPlan, AugmentTier, TierProportions};
use poselift_core::representations::FusionWeights;
use poselift_core::{KinematicTree, SkeletonDef, SkeletonId};
use serde::{Deserialize, Serialize};

use crate::write::{read_text, to_json_bytes};
use crate::{IoError, Location};

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| IoError::json(path, &e))
}

fn parse_id(text: &str, path: &Path, field: &str) -> Result<SkeletonId, IoError> {
    u64::from_str_radix(text, 16)
        .map(SkeletonId)
        .map_err(|_| IoError::parse(path, Location::field(field), format!("`{text}` is not a skeleton id")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonRef {
    pub name: String,
    pub id: String,
}

impl SkeletonRef {
    pub fn new(def: &SkeletonDef, tree: &KinematicTree) -> Self {
        Self {
            name: def.name.clone(),
            id: tree.id().to_string(),
        }
    }
}

/// Output of `poselift cluster`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterFile {
    pub k: usize,
    pub seed: u64,
    pub skeleton: SkeletonRef,
    /// Flattened root-relative centroids, mm.
    pub centroids: Vec<Vec<f64>>,
    /// One entry per clustered frame, in archive order.
    pub assignments: Vec<FrameCluster>,
    pub inertia: f64,
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    /// Class name per cluster id, when a class map was supplied.
    pub class_map: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameCluster {
    pub frame: u64,
    pub cluster: usize,
}

impl ClusterFile {
    pub fn new(clusters: &PoseClusters, frames: &[u64], skeleton: SkeletonRef) -> Self {
        Self {
            k: clusters.k,
            seed: clusters.seed,
            skeleton,
            centroids: clusters.centroids.clone(),
            assignments: frames
                .iter()
                .zip(&clusters.assignments)
                .map(|(&frame, &cluster)| FrameCluster { frame, cluster })
                .collect(),
            inertia: clusters.inertia,
            inertia_history: clusters.inertia_history.clone(),
            iterations: clusters.iterations,
            class_map: clusters.class_map.clone(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_json_bytes(self)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let file: Self = load_json(path)?;
        if let Some(bad) = file.assignments.iter().position(|a| a.cluster >= file.k) {
            return Err(IoError::parse(path, Location::field(format!("assignments[{bad}].cluster")), "cluster id out of range"));
        }
        if file.class_map.as_ref().is_some_and(|m| m.len() != file.k) {
            return Err(IoError::parse(path, Location::field("class_map"), "class_map needs one name per cluster"));
        }
        Ok(file)
    }

    /// Class name of every frame, when the file carries a class map.
    pub fn frame_classes(&self) -> Option<BTreeMap<u64, String>> {
        let names = self.class_map.as_ref()?;
        Some(
            self.assignments
                .iter()
                .map(|a| (a.frame, names[a.cluster].clone()))
                .collect(),
        )
    }
}

/// Reads a `{"<cluster id>": "<class name>"}` object.
pub fn load_class_map(path: &Path) -> Result<BTreeMap<usize, String>, IoError> {
    load_json(path)
}

/// Output of `poselift retarget fit`. `matrix` is row-major, one row per
/// target joint; affine maps carry a trailing bias column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetargetFile {
    pub source: SkeletonRef,
    pub target: SkeletonRef,
    pub affine: bool,
    pub ridge_lambda: f64,
    pub matrix: Vec<Vec<f64>>,
}

impl RetargetFile {
    pub fn new(map: &RetargetMap, source: SkeletonRef, target: SkeletonRef, ridge_lambda: f64) -> Self {
        let m = map.matrix();
        Self {
            source,
            target,
            affine: map.is_affine(),
            ridge_lambda,
            matrix: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_json_bytes(self)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        load_json(path)
    }

    pub fn to_map(&self, path: &Path) -> Result<RetargetMap, IoError> {
        let rows = self.matrix.len();
        let cols = self.matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(IoError::parse(path, Location::field("matrix"), "empty matrix"));
        }
        if let Some(bad) = self.matrix.iter().position(|r| r.len() != cols) {
            return Err(IoError::parse(path, Location::field(format!("matrix[{bad}]")), "ragged matrix row"));
        }
        let m = DMatrix::from_fn(rows, cols, |i, j| self.matrix[i][j]);
        let source = parse_id(&self.source.id, path, "source.id")?;
        let target = parse_id(&self.target.id, path, "target.id")?;
        RetargetMap::new(m, source, target, self.affine).map_err(|source| IoError::Invariant {
            path: path.to_owned(),
            source,
        })
    }
}

/// Output of `poselift fuse fit`: one `[direct, first, second]` weight row
/// per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionFile {
    pub skeleton: SkeletonRef,
    pub ridge_lambda: f64,
    pub samples: usize,
    pub weights: Vec<[f64; 3]>,
}

impl FusionFile {
    pub fn to_json(&self) -> Vec<u8> {
        to_json_bytes(self)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        load_json(path)
    }

    pub fn to_weights(&self, path: &Path) -> Result<FusionWeights, IoError> {
        FusionWeights::new(self.weights.clone()).map_err(|source| IoError::Invariant {
            path: path.to_owned(),
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProportionsJson {
    pub none: f64,
    pub bg_chair: f64,
    pub full: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub frame: u64,
    pub tier: String,
}

/// Output of `poselift augment plan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub seed: u64,
    pub proportions: ProportionsJson,
    pub counts: ProportionsCounts,
    pub assignments: Vec<PlanEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProportionsCounts {
    pub none: usize,
    pub bg_chair: usize,
    pub full: usize,
}

impl PlanFile {
    pub fn new(plan: &AugmentPlan) -> Self {
        let p = &plan.proportions;
        let [none, bg_chair, full] = plan.counts();
        Self {
            seed: plan.seed,
            proportions: ProportionsJson {
                none: p.get(AugmentTier::None),
                bg_chair: p.get(AugmentTier::BackgroundChair),
                full: p.get(AugmentTier::Full),
            },
            counts: ProportionsCounts { none, bg_chair, full },
            assignments: plan
                .assignments
                .iter()
                .map(|&(frame, tier)| PlanEntry {
                    frame,
                    tier: tier.as_str().to_owned(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_json_bytes(self)
    }

    pub fn load(path: &Path) -> Result<AugmentPlan, IoError> {
        let file: Self = load_json(path)?;
        let p = file.proportions;
        let proportions = TierProportions::new(p.none, p.bg_chair, p.full)
            .map_err(|e| IoError::parse(path, Location::field("proportions"), e.to_string()))?;
        let assignments = file
            .assignments
            .iter()
            .enumerate()
            .map(|(i, e)| {
                AugmentTier::parse(&e.tier)
                    .map(|t| (e.frame, t))
                    .ok_or_else(|| IoError::parse(path, Location::field(format!("assignments[{i}].tier")).with_frame(e.frame), format!("unknown tier `{}`", e.tier)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AugmentPlan {
            seed: file.seed,
            proportions,
            assignments,
        })
    }
}
