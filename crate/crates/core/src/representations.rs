//! Pose encodings and multi-estimate fusion.
//!
//! A root-relative pose `P` can be re-expressed as offsets to each joint's
//! first-order parent (`O1`) or second-order parent (`O2`). Each encoding
//! constrains the pose differently, so a network predicting all three gives
//! three estimates that can be fused per joint. Here fusion is an affine
//! combination per joint whose weights are fit by ridge least squares.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // supplies f64 math under no_std
use num_traits::Float;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::pose::{Frame, Pose3D};
use crate::skeleton::{KinematicTree, SkeletonId};
use crate::{Error, Result};

pub use crate::skeleton::RelOrder;

/// Tolerance on the row sums of [`FusionWeights`].
pub const AFFINE_TOLERANCE: f64 = 1e-9;

/// Parent-relative pose: `deltas[j] = joints[j] - joints[parent(j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelPose {
    deltas: Vec<Vector3<f64>>,
    order: RelOrder,
    skeleton: SkeletonId,
}

impl RelPose {
    pub fn new(deltas: Vec<Vector3<f64>>, order: RelOrder, tree: &KinematicTree) -> Result<Self> {
        if deltas.len() != tree.len() {
            return Err(Error::JointCountMismatch {
                expected: tree.len(),
                actual: deltas.len(),
            });
        }
        if let Some(j) = deltas.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite(j));
        }
        Ok(Self {
            deltas,
            order,
            skeleton: tree.id(),
        })
    }

    pub fn deltas(&self) -> &[Vector3<f64>] {
        &self.deltas
    }

    pub fn order(&self) -> RelOrder {
        self.order
    }

    pub fn skeleton(&self) -> SkeletonId {
        self.skeleton
    }
}

/// Re-centers a global pose on its root joint.
pub fn to_root_relative(pose: &Pose3D, tree: &KinematicTree) -> Result<Pose3D> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::CameraGlobal {
        return Err(Error::WrongFrame);
    }
    let root = pose.joints()[tree.root()];
    let mut joints: Vec<_> = pose.joints().iter().map(|p| p - root).collect();
    joints[tree.root()] = Vector3::zeros();
    Ok(Pose3D::from_parts(joints, Frame::RootRelative, tree.id()))
}

pub fn encode_relative(pose: &Pose3D, tree: &KinematicTree, order: RelOrder) -> Result<RelPose> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::RootRelative {
        return Err(Error::WrongFrame);
    }
    let parents = tree.parents(order);
    let joints = pose.joints();
    let deltas = joints
        .iter()
        .zip(parents)
        .map(|(p, &parent)| p - joints[parent])
        .collect();
    Ok(RelPose {
        deltas,
        order,
        skeleton: tree.id(),
    })
}

/// Inverse of [`encode_relative`]; accumulates offsets in topological order.
pub fn decode_relative(rel: &RelPose, tree: &KinematicTree) -> Result<Pose3D> {
    if rel.skeleton != tree.id() || rel.deltas.len() != tree.len() {
        return Err(Error::SkeletonMismatch);
    }
    if rel.deltas[tree.root()] != Vector3::zeros() {
        return Err(Error::RootNotAtOrigin);
    }
    let parents = tree.parents(rel.order);
    let mut joints = vec![Vector3::zeros(); tree.len()];
    for &j in tree.topological_order() {
        if j != tree.root() {
            joints[j] = rel.deltas[j] + joints[parents[j]];
        }
    }
    Ok(Pose3D::from_parts(joints, Frame::RootRelative, tree.id()))
}

/// Per-joint weights for the (P, O1, O2) estimates. Rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    rows: Vec<[f64; 3]>,
}

impl FusionWeights {
    pub fn new(rows: Vec<[f64; 3]>) -> Result<Self> {
        for (j, r) in rows.iter().enumerate() {
            if !r.iter().all(|w| w.is_finite()) || (r.iter().sum::<f64>() - 1.0).abs() > AFFINE_TOLERANCE {
                return Err(Error::NonAffineWeights(j));
            }
        }
        Ok(Self { rows })
    }

    pub fn uniform(joints: usize) -> Self {
        Self {
            rows: vec![[1.0 / 3.0; 3]; joints],
        }
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }
}

/// `P_fused[j] = w[j,0] p[j] + w[j,1] decode(o1)[j] + w[j,2] decode(o2)[j]`.
pub fn fuse(
    p: &Pose3D,
    o1: &RelPose,
    o2: &RelPose,
    weights: &FusionWeights,
    tree: &KinematicTree,
) -> Result<Pose3D> {
    p.check_skeleton(tree)?;
    if p.frame() != Frame::RootRelative {
        return Err(Error::WrongFrame);
    }
    if weights.rows.len() != tree.len() {
        return Err(Error::ShapeMismatch("fusion weights rows != joints"));
    }
    let d1 = decode_relative(o1, tree)?;
    let d2 = decode_relative(o2, tree)?;
    let mut joints: Vec<_> = weights
        .rows
        .iter()
        .zip(p.joints().iter().zip(d1.joints().iter().zip(d2.joints())))
        .map(|(w, (a, (b, c)))| a * w[0] + b * w[1] + c * w[2])
        .collect();
    joints[tree.root()] = Vector3::zeros();
    Ok(Pose3D::from_parts(joints, Frame::RootRelative, tree.id()))
}

/// One training example for [`fit_fusion_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct FusionSample {
    pub p: Pose3D,
    pub o1: RelPose,
    pub o2: RelPose,
    pub truth: Pose3D,
}

/// Fits per-joint affine fusion weights.
///
/// For each joint the weights minimize the squared error to the ground truth
/// over all samples and axes plus `ridge_lambda * |w - (1/3, 1/3, 1/3)|^2`,
/// subject to the weights summing to one. The constraint is enforced by
/// solving in the two-dimensional sum-zero subspace around the uniform prior.
/// Rank-deficient joints fall back to the minimum-norm step, i.e. the
/// admissible weights closest to uniform.
pub fn fit_fusion_weights(
    samples: &[FusionSample],
    tree: &KinematicTree,
    ridge_lambda: f64,
) -> Result<FusionWeights> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if !(ridge_lambda >= 0.0) || !ridge_lambda.is_finite() {
        return Err(Error::BadRegularizer);
    }

    let n = tree.len();
    let mut gram = vec![Matrix3::<f64>::zeros(); n];
    let mut rhs = vec![Vector3::<f64>::zeros(); n];
    for s in samples {
        s.truth.check_skeleton(tree)?;
        if s.truth.frame() != Frame::RootRelative {
            return Err(Error::WrongFrame);
        }
        let fused_uniform = FusionWeights::uniform(n);
        // Validates skeleton ids and frames of the three estimates.
        fuse(&s.p, &s.o1, &s.o2, &fused_uniform, tree)?;
        let d1 = decode_relative(&s.o1, tree)?;
        let d2 = decode_relative(&s.o2, tree)?;
        for j in 0..n {
            let (a, b, c, g) = (s.p.joints()[j], d1.joints()[j], d2.joints()[j], s.truth.joints()[j]);
            for axis in 0..3 {
                let row = Vector3::new(a[axis], b[axis], c[axis]);
                gram[j] += row * row.transpose();
                rhs[j] += row * g[axis];
            }
        }
    }

    let uniform = Vector3::repeat(1.0 / 3.0);
    let basis = nalgebra::Matrix3x2::new(
        1.0 / 2.0.sqrt(),
        1.0 / 6.0.sqrt(),
        -1.0 / 2.0.sqrt(),
        1.0 / 6.0.sqrt(),
        0.0,
        -2.0 / 6.0.sqrt(),
    );
    let rows = (0..n)
        .map(|j| {
            if j == tree.root() {
                return [1.0 / 3.0; 3];
            }
            let reduced: Matrix2<f64> = basis.transpose() * gram[j] * basis + Matrix2::identity() * ridge_lambda;
            let target: Vector2<f64> = basis.transpose() * (rhs[j] - gram[j] * uniform);
            let step = solve_min_norm(&reduced, &target);
            let w = uniform + basis * step;
            let sum = w.sum();
            [w[0] / sum, w[1] / sum, w[2] / sum]
        })
        .collect();
    FusionWeights::new(rows)
}

fn solve_min_norm(a: &Matrix2<f64>, b: &Vector2<f64>) -> Vector2<f64> {
    let svd = a.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12;
    if svd.singular_values.max() <= 0.0 {
        return Vector2::zeros();
    }
    svd.solve(b, cutoff).unwrap_or_else(|_| Vector2::zeros())
}
