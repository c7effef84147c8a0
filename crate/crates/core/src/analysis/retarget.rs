use nalgebra::{DMatrix, DVector, Vector3};

use crate::pose::Pose3D;
use crate::skeleton::{KinematicTree, SkeletonId};
use crate::{Error, Result};

/// Linear joint map shared by the x, y and z axes:
/// `out_axis = M * in_axis (+ bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RetargetMap {
    /// `target_joints x source_joints`, plus a trailing bias column when affine.
    matrix: DMatrix<f64>,
    source: SkeletonId,
    target: SkeletonId,
    affine: bool,
}

impl RetargetMap {
    pub fn new(matrix: DMatrix<f64>, source: SkeletonId, target: SkeletonId, affine: bool) -> Result<Self> {
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::ShapeMismatch("map entries must be finite"));
        }
        if affine && matrix.ncols() < 2 {
            return Err(Error::ShapeMismatch("affine map needs a bias column"));
        }
        Ok(Self {
            matrix,
            source,
            target,
            affine,
        })
    }

    pub fn identity(tree: &KinematicTree) -> Self {
        Self {
            matrix: DMatrix::identity(tree.len(), tree.len()),
            source: tree.id(),
            target: tree.id(),
            affine: false,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source(&self) -> SkeletonId {
        self.source
    }

    pub fn target(&self) -> SkeletonId {
        self.target
    }

    pub fn is_affine(&self) -> bool {
        self.affine
    }

    pub fn source_joints(&self) -> usize {
        self.matrix.ncols() - usize::from(self.affine)
    }

    pub fn target_joints(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RetargetOptions {
    pub ridge_lambda: f64,
    /// Adds a per-joint bias column (same bias on every axis).
    pub affine: bool,
}

fn axis_vector(pose: &Pose3D, axis: usize, affine: bool) -> DVector<f64> {
    let n = pose.len();
    DVector::from_fn(n + usize::from(affine), |i, _| if i < n { pose.joints()[i][axis] } else { 1.0 })
}

fn check_lists(src: &[Pose3D], tgt: &[Pose3D]) -> Result<()> {
    if src.len() != tgt.len() {
        return Err(Error::ShapeMismatch("source and target frame counts differ"));
    }
    if src.is_empty() {
        return Err(Error::InsufficientFrames { needed: 1, got: 0 });
    }
    let consistent = |list: &[Pose3D]| {
        list.iter()
            .all(|p| p.skeleton() == list[0].skeleton() && p.len() == list[0].len())
    };
    if !consistent(src) || !consistent(tgt) {
        return Err(Error::SkeletonMismatch);
    }
    Ok(())
}

/// Ridge least-squares fit of the shared joint map from paired frames.
///
/// Minimizes `sum_frames sum_axes |M s - t|^2 + lambda |M|^2` through the
/// normal equations. With `lambda == 0` a rank-deficient system is an error.
pub fn fit_retarget_map(src: &[Pose3D], tgt: &[Pose3D], options: RetargetOptions) -> Result<RetargetMap> {
    check_lists(src, tgt)?;
    let lambda = options.ridge_lambda;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::BadRegularizer);
    }
    let cols = src[0].len() + usize::from(options.affine);
    let rows = tgt[0].len();
    if lambda == 0.0 && src.len() < cols {
        return Err(Error::InsufficientFrames {
            needed: cols,
            got: src.len(),
        });
    }

    let mut gram = DMatrix::<f64>::zeros(cols, cols);
    let mut cross = DMatrix::<f64>::zeros(rows, cols);
    for (s, t) in src.iter().zip(tgt) {
        for axis in 0..3 {
            let sv = axis_vector(s, axis, options.affine);
            let tv = DVector::from_fn(rows, |i, _| t.joints()[i][axis]);
            gram.ger(1.0, &sv, &sv, 1.0);
            cross.ger(1.0, &tv, &sv, 1.0);
        }
    }
    if lambda == 0.0 {
        let eig = gram.clone().symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        if !(hi > 0.0) || lo <= hi * 1e-12 {
            return Err(Error::RankDeficient);
        }
    } else {
        for i in 0..cols {
            gram[(i, i)] += lambda;
        }
    }
    // M G = C  <=>  G M^T = C^T  (G symmetric positive definite)
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    let matrix = chol.solve(&cross.transpose()).transpose();
    RetargetMap::new(matrix, src[0].skeleton(), tgt[0].skeleton(), options.affine)
}

/// Applies the map to every axis. `target` must be the map's target skeleton.
pub fn apply_retarget_map(map: &RetargetMap, pose: &Pose3D, target: &KinematicTree) -> Result<Pose3D> {
    if pose.skeleton() != map.source || pose.len() != map.source_joints() {
        return Err(Error::SkeletonMismatch);
    }
    if target.id() != map.target || target.len() != map.target_joints() {
        return Err(Error::SkeletonMismatch);
    }
    let mut out = alloc::vec![Vector3::zeros(); map.target_joints()];
    for axis in 0..3 {
        let mapped = &map.matrix * axis_vector(pose, axis, map.affine);
        for (o, v) in out.iter_mut().zip(mapped.iter()) {
            o[axis] = *v;
        }
    }
    Ok(Pose3D::from_parts(out, pose.frame(), target.id()))
}

/// Sum of squared joint errors of `map` over paired frames (mm^2).
pub fn retarget_residual(map: &RetargetMap, src: &[Pose3D], tgt: &[Pose3D]) -> Result<f64> {
    check_lists(src, tgt)?;
    let mut total = 0.0;
    for (s, t) in src.iter().zip(tgt) {
        if t.skeleton() != map.target || t.len() != map.target_joints() {
            return Err(Error::SkeletonMismatch);
        }
        if s.skeleton() != map.source || s.len() != map.source_joints() {
            return Err(Error::SkeletonMismatch);
        }
        for axis in 0..3 {
            let mapped = &map.matrix * axis_vector(s, axis, map.affine);
            total += mapped
                .iter()
                .zip(t.joints())
                .map(|(m, g)| (m - g[axis]) * (m - g[axis]))
                .sum::<f64>();
        }
    }
    Ok(total)
}
