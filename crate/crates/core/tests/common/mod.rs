#![allow(dead_code)]

use poselift_core::skeleton::{JointDef, SymmetryGroup};
use poselift_core::synth::{PoseSampler, SceneParams};
use poselift_core::{build_skeleton, Frame, KinematicTree, Pose3D, SkeletonDef, Vector3};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 17] = [
    "head_top", "neck", "r_shoulder", "r_elbow", "r_wrist", "l_shoulder", "l_elbow", "l_wrist", "r_hip",
    "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle", "pelvis", "spine", "head",
];
pub const PARENTS: [usize; 17] = [16, 15, 1, 2, 3, 1, 5, 6, 14, 8, 9, 14, 11, 12, 14, 14, 1];

pub fn h36m17() -> SkeletonDef {
    let pair = |name: &str, a: usize, b: usize| SymmetryGroup {
        name: name.to_owned(),
        pairs: vec![(a, b)],
    };
    SkeletonDef {
        name: "h36m17".to_owned(),
        joints: NAMES
            .iter()
            .zip(PARENTS)
            .map(|(n, parent)| JointDef {
                name: (*n).to_owned(),
                parent,
            })
            .collect(),
        root: 14,
        eval_subset: (0..14).collect(),
        symmetry: vec![
            pair("ankles", 10, 13),
            pair("knees", 9, 12),
            pair("hips", 8, 11),
            pair("wrists", 4, 7),
            pair("elbows", 3, 6),
            pair("shoulders", 2, 5),
            pair("head_neck", 0, 1),
        ],
    }
}

pub fn tree() -> (SkeletonDef, KinematicTree) {
    let def = h36m17();
    let tree = build_skeleton(&def).unwrap();
    (def, tree)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sampler() -> (KinematicTree, PoseSampler) {
    let (def, tree) = tree();
    let s = PoseSampler::new(&def, &tree);
    (tree, s)
}

pub fn scene_params() -> SceneParams {
    SceneParams::default()
}

/// Root-relative pose with independent uniform coordinates in `[-r, r]`.
pub fn random_pose(rng: &mut impl Rng, tree: &KinematicTree, r: f64) -> Pose3D {
    let mut joints: Vec<Vector3<f64>> = (0..tree.len())
        .map(|_| Vector3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r)))
        .collect();
    joints[tree.root()] = Vector3::zeros();
    Pose3D::root_relative(joints, tree).unwrap()
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn noisy(rng: &mut impl Rng, pose: &Pose3D, sigma: f64, tree: &KinematicTree) -> Pose3D {
    let joints = pose
        .joints()
        .iter()
        .enumerate()
        .map(|(i, j)| {
            if pose.frame() == Frame::RootRelative && i == tree.root() {
                *j
            } else {
                j + Vector3::new(gaussian(rng), gaussian(rng), gaussian(rng)) * sigma
            }
        })
        .collect();
    Pose3D::new(joints, pose.frame(), tree).unwrap()
}
