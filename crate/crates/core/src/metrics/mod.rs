//! 3D pose accuracy metrics.
//!
//! * MPJPE: mean Euclidean joint error (mm) over a joint subset.
//! * 3DPCK: fraction of joints whose error is strictly below a threshold.
//! * AUC: mean of 3DPCK sampled on a uniform threshold grid.
//!
//! A joint is correct when `error < threshold`, so a joint exactly at the
//! threshold counts as incorrect. An exactly matching joint (error 0) is
//! correct at every threshold, including 0.

mod align;
mod eval;

use alloc::vec::Vec;

use crate::pose::Pose3D;
use crate::{Error, Result};

pub use align::{align, AlignMode};
pub use eval::{
    evaluate, frame_eval, Bucket, BucketKind, EvalAccumulator, EvalConfig, EvalFrame, EvalReport,
    FrameEval, FrameLabels, MetricSummary,
};

/// Correctness predicate shared by every PCK computation.
#[inline]
pub fn is_correct(error: f64, threshold: f64) -> bool {
    error < threshold || error == 0.0
}

/// Default 3DPCK threshold in mm.
pub const DEFAULT_PCK_THRESHOLD: f64 = 150.0;

fn check_pair(pred: &Pose3D, gt: &Pose3D, subset: &[usize]) -> Result<()> {
    if pred.skeleton() != gt.skeleton() || pred.len() != gt.len() {
        return Err(Error::SkeletonMismatch);
    }
    if pred.frame() != gt.frame() {
        return Err(Error::FrameMismatch);
    }
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= pred.len()) {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: pred.len(),
            context: "joint subset",
        });
    }
    Ok(())
}

/// Per-joint Euclidean errors over `subset`, in subset order.
pub fn joint_errors(pred: &Pose3D, gt: &Pose3D, subset: &[usize]) -> Result<Vec<f64>> {
    check_pair(pred, gt, subset)?;
    Ok(subset
        .iter()
        .map(|&j| (pred.joints()[j] - gt.joints()[j]).norm())
        .collect())
}

pub fn mpjpe(pred: &Pose3D, gt: &Pose3D, subset: &[usize]) -> Result<f64> {
    let errors = joint_errors(pred, gt, subset)?;
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

pub fn pck3d(pred: &Pose3D, gt: &Pose3D, subset: &[usize], threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::BadRange("threshold must be >= 0"));
    }
    let errors = joint_errors(pred, gt, subset)?;
    let hits = errors.iter().filter(|&&e| is_correct(e, threshold)).count();
    Ok(hits as f64 / errors.len() as f64)
}

/// Uniform threshold grid `min, min + step, ..., max` (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRange {
    min: f64,
    max: f64,
    step: f64,
}

impl ThresholdRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::BadRange("bounds must be finite"));
        }
        if min < 0.0 {
            return Err(Error::BadRange("min must be >= 0"));
        }
        if min > max {
            return Err(Error::BadRange("min must not exceed max"));
        }
        if !(step > 0.0) {
            return Err(Error::BadRange("step must be positive"));
        }
        Ok(Self { min, max, step })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        // Small slack so that e.g. 150 / 5 lands on 30 and not 29.999.
        ((self.max - self.min) / self.step + 1e-9) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn thresholds(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.min + i as f64 * self.step).collect()
    }
}

impl Default for ThresholdRange {
    /// 0 to 150 mm in 5 mm steps (31 samples).
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 150.0,
            step: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PckCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

/// Counts, per threshold, how many errors fall strictly below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CurveCounter {
    /// `first_hit[i]` counts errors whose smallest passing threshold is `i`;
    /// the last slot collects errors that pass none.
    first_hit: Vec<u64>,
}

impl CurveCounter {
    pub(crate) fn new(samples: usize) -> Self {
        Self {
            first_hit: alloc::vec![0; samples + 1],
        }
    }

    pub(crate) fn add(&mut self, thresholds: &[f64], error: f64) {
        let i = if error == 0.0 {
            0
        } else {
            thresholds.partition_point(|&t| t <= error)
        };
        self.first_hit[i] += 1;
    }

    pub(crate) fn merge(&mut self, other: &Self) {
        for (a, b) in self.first_hit.iter_mut().zip(&other.first_hit) {
            *a += b;
        }
    }

    /// Cumulative hit counts per threshold.
    pub(crate) fn hits(&self) -> Vec<u64> {
        let n = self.first_hit.len() - 1;
        let mut acc = 0;
        (0..n)
            .map(|i| {
                acc += self.first_hit[i];
                acc
            })
            .collect()
    }
}

pub fn pck_curve(pred: &Pose3D, gt: &Pose3D, subset: &[usize], range: &ThresholdRange) -> Result<PckCurve> {
    let errors = joint_errors(pred, gt, subset)?;
    let thresholds = range.thresholds();
    let mut counter = CurveCounter::new(thresholds.len());
    for &e in &errors {
        counter.add(&thresholds, e);
    }
    let total = errors.len() as f64;
    let values = counter.hits().into_iter().map(|h| h as f64 / total).collect();
    Ok(PckCurve { thresholds, values })
}

/// Area under the PCK curve normalized to `[0, 1]` (mean of the samples).
pub fn auc(curve: &PckCurve) -> f64 {
    if curve.values.is_empty() {
        return 0.0;
    }
    curve.values.iter().sum::<f64>() / curve.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{build_skeleton, JointDef, KinematicTree, SkeletonDef};
    use crate::{Frame, Vector3};
    use alloc::format;
    use alloc::vec;

    fn star(n: usize) -> KinematicTree {
        build_skeleton(&SkeletonDef {
            name: format!("star{n}"),
            joints: (0..n)
                .map(|i| JointDef {
                    name: format!("j{i}"),
                    parent: 0,
                })
                .collect(),
            root: 0,
            eval_subset: (0..n).collect(),
            symmetry: vec![],
        })
        .unwrap()
    }

    fn pose(t: &KinematicTree, f: impl Fn(usize) -> Vector3<f64>) -> Pose3D {
        Pose3D::global((0..t.len()).map(f).collect(), t).unwrap()
    }

    #[test]
    fn single_joint_offset() {
        let t = star(17);
        let gt = pose(&t, |i| Vector3::new(i as f64 * 10.0, 0.0, 3000.0));
        let mut j = gt.joints().to_vec();
        j[5].y += 170.0;
        let pred = Pose3D::global(j, &t).unwrap();
        let all: Vec<usize> = (0..17).collect();
        assert_eq!(mpjpe(&pred, &gt, &all).unwrap(), 10.0);
        assert_eq!(mpjpe(&gt, &gt, &all).unwrap(), 0.0);
    }

    #[test]
    fn pck_counts() {
        let t = star(17);
        let gt = pose(&t, |i| Vector3::new(0.0, i as f64, 0.0));
        let mut j = gt.joints().to_vec();
        j[3].x += 200.0;
        let pred = Pose3D::global(j, &t).unwrap();
        let subset: Vec<usize> = (0..14).collect();
        assert_eq!(pck3d(&gt, &gt, &subset, 150.0).unwrap(), 1.0);
        assert_eq!(pck3d(&pred, &gt, &subset, 150.0).unwrap(), 13.0 / 14.0);
        // threshold 0 keeps exactly matching joints only
        assert_eq!(pck3d(&pred, &gt, &subset, 0.0).unwrap(), 13.0 / 14.0);
        let mut far = pred.joints().to_vec();
        far[0].z += 1e-9;
        let far = Pose3D::global(far, &t).unwrap();
        assert_eq!(pck3d(&far, &gt, &subset, 0.0).unwrap(), 12.0 / 14.0);
        // strict: error exactly 200 is not below 200
        assert_eq!(pck3d(&pred, &gt, &subset, 200.0).unwrap(), 13.0 / 14.0);
    }

    #[test]
    fn step_function_auc() {
        let t = star(4);
        let gt = pose(&t, |i| Vector3::new(i as f64 * 1000.0, 0.0, 0.0));
        let pred = pose(&t, |i| Vector3::new(i as f64 * 1000.0, 75.0, 0.0));
        let curve = pck_curve(&pred, &gt, &[0, 1, 2, 3], &ThresholdRange::default()).unwrap();
        assert_eq!(curve.thresholds.len(), 31);
        assert_eq!(curve.values[15], 0.0); // t = 75
        assert_eq!(curve.values[16], 1.0); // t = 80
        assert_eq!(auc(&curve), 15.0 / 31.0);
        let perfect = pck_curve(&gt, &gt, &[0, 1, 2, 3], &ThresholdRange::default()).unwrap();
        assert_eq!(perfect.values[0], 1.0);
        assert_eq!(auc(&perfect), 1.0);
    }

    #[test]
    fn auc_of_perfect_prediction_above_zero() {
        let t = star(3);
        let gt = pose(&t, |i| Vector3::new(i as f64, 0.0, 0.0));
        let curve = pck_curve(&gt, &gt, &[0, 1, 2], &ThresholdRange::new(5.0, 150.0, 5.0).unwrap()).unwrap();
        assert_eq!(auc(&curve), 1.0);
    }

    #[test]
    fn range_validation() {
        assert!(ThresholdRange::new(10.0, 5.0, 1.0).is_err());
        assert!(ThresholdRange::new(0.0, 5.0, 0.0).is_err());
        assert!(ThresholdRange::new(-1.0, 5.0, 1.0).is_err());
        assert_eq!(ThresholdRange::new(0.0, 0.0, 1.0).unwrap().len(), 1);
        assert_eq!(ThresholdRange::new(0.0, 1.0, 0.1).unwrap().len(), 11);
    }

    #[test]
    fn mismatches() {
        let a = star(3);
        let b = star(4);
        let pa = pose(&a, |_| Vector3::zeros());
        let pb = pose(&b, |_| Vector3::zeros());
        assert_eq!(mpjpe(&pa, &pb, &[0]).unwrap_err(), Error::SkeletonMismatch);
        let rr = Pose3D::new(vec![Vector3::zeros(); 3], Frame::RootRelative, &a).unwrap();
        assert_eq!(mpjpe(&pa, &rr, &[0]).unwrap_err(), Error::FrameMismatch);
        assert_eq!(mpjpe(&pa, &pa, &[]).unwrap_err(), Error::EmptySubset);
    }
}
