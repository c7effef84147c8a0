//! Skeleton definition files.
//!
//! ```json
//! {
//!   "name": "h36m17",
//!   "joints": [{"name": "pelvis", "parent": "pelvis"}, {"name": "spine", "parent": "pelvis"}],
//!   "root": "pelvis",
//!   "eval_subset": [0, 1],
//!   "symmetry": {"hips": [[8, 11]]}
//! }
//! ```
//!
//! Parents are given by name and the root names itself as parent.
//! `eval_subset` defaults to every joint and `symmetry` to no groups.

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use poselift_core::skeleton::{JointDef, SymmetryGroup};
use poselift_core::{build_skeleton, KinematicTree, SkeletonDef};
use serde::{Deserialize, Serialize};

use crate::write::read_text;
use crate::{IoError, Location};

const BUNDLED_H36M17: &str = include_str!("../data/h36m17.skeleton.json");

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    name: String,
    parent: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSkeleton {
    name: String,
    joints: Vec<RawJoint>,
    root: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eval_subset: Option<Vec<usize>>,
    #[serde(default)]
    symmetry: IndexMap<String, Vec<[usize; 2]>>,
}

/// Parses a skeleton file body. `path` is only used in diagnostics.
pub fn parse_skeleton(text: &str, path: &Path) -> Result<SkeletonDef, IoError> {
    let raw: RawSkeleton = serde_json::from_str(text).map_err(|e| IoError::json(path, &e))?;
    let mut index = HashMap::new();
    for (i, j) in raw.joints.iter().enumerate() {
        if index.insert(j.name.as_str(), i).is_some() {
            return Err(IoError::parse(
                path,
                Location::field(format!("joints[{i}].name")),
                format!("duplicate joint name `{}`", j.name),
            ));
        }
    }
    let joints = raw
        .joints
        .iter()
        .enumerate()
        .map(|(i, j)| match index.get(j.parent.as_str()) {
            Some(&parent) => Ok(JointDef {
                name: j.name.clone(),
                parent,
            }),
            None => Err(IoError::parse(
                path,
                Location::field(format!("joints[{i}].parent")),
                format!("unknown parent `{}`", j.parent),
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let root = *index
        .get(raw.root.as_str())
        .ok_or_else(|| IoError::parse(path, Location::field("root"), format!("unknown root joint `{}`", raw.root)))?;
    let def = SkeletonDef {
        name: raw.name,
        eval_subset: raw.eval_subset.unwrap_or_else(|| (0..joints.len()).collect()),
        joints,
        root,
        symmetry: raw
            .symmetry
            .into_iter()
            .map(|(name, pairs)| SymmetryGroup {
                name,
                pairs: pairs.into_iter().map(|[a, b]| (a, b)).collect(),
            })
            .collect(),
    };
    Ok(def)
}

/// Reads and validates a skeleton file.
pub fn load_skeleton(path: &Path) -> Result<(SkeletonDef, KinematicTree), IoError> {
    let def = parse_skeleton(&read_text(path)?, path)?;
    let tree = build_skeleton(&def).map_err(|source| IoError::Invariant {
        path: path.to_owned(),
        source,
    })?;
    Ok((def, tree))
}

/// The 17-joint skeleton shipped with the crate (root `pelvis`).
pub fn bundled_h36m17() -> (SkeletonDef, KinematicTree) {
    let def = parse_skeleton(BUNDLED_H36M17, Path::new("h36m17.skeleton.json")).expect("bundled skeleton parses");
    let tree = build_skeleton(&def).expect("bundled skeleton is valid");
    (def, tree)
}

/// Serializes a definition in the file format read by [`parse_skeleton`].
pub fn skeleton_to_json(def: &SkeletonDef) -> String {
    let raw = RawSkeleton {
        name: def.name.clone(),
        joints: def
            .joints
            .iter()
            .map(|j| RawJoint {
                name: j.name.clone(),
                parent: def.joints[j.parent].name.clone(),
            })
            .collect(),
        root: def.joints[def.root].name.clone(),
        eval_subset: Some(def.eval_subset.clone()),
        symmetry: def
            .symmetry
            .iter()
            .map(|g| (g.name.clone(), g.pairs.iter().map(|&(a, b)| [a, b]).collect()))
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("serializing plain data") + "\n"
}
