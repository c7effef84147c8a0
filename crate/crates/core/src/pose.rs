use alloc::vec::Vec;

use nalgebra::{Vector2, Vector3};

use crate::skeleton::{KinematicTree, SkeletonId};
use crate::{Error, Result};

/// Coordinate frame a [`Pose3D`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Camera axes, root joint at the origin.
    RootRelative,
    /// Camera coordinates including the global position.
    CameraGlobal,
}

/// J joints in millimeters.
///
/// Root-relative poses built through [`Pose3D::root_relative`] have their
/// root at exactly the origin. Poses produced by [`crate::metrics::align`]
/// carry the reference pose's frame tag but are not re-centered.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose3D {
    joints: Vec<Vector3<f64>>,
    frame: Frame,
    skeleton: SkeletonId,
}

impl Pose3D {
    pub fn new(joints: Vec<Vector3<f64>>, frame: Frame, tree: &KinematicTree) -> Result<Self> {
        if joints.len() != tree.len() {
            return Err(Error::JointCountMismatch {
                expected: tree.len(),
                actual: joints.len(),
            });
        }
        if let Some(j) = joints.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite(j));
        }
        if frame == Frame::RootRelative && joints[tree.root()] != Vector3::zeros() {
            return Err(Error::RootNotAtOrigin);
        }
        Ok(Self {
            joints,
            frame,
            skeleton: tree.id(),
        })
    }

    pub fn root_relative(joints: Vec<Vector3<f64>>, tree: &KinematicTree) -> Result<Self> {
        Self::new(joints, Frame::RootRelative, tree)
    }

    pub fn global(joints: Vec<Vector3<f64>>, tree: &KinematicTree) -> Result<Self> {
        Self::new(joints, Frame::CameraGlobal, tree)
    }

    /// Builds from a flat `[x0, y0, z0, x1, ...]` slice.
    pub fn from_flat(values: &[f64], frame: Frame, tree: &KinematicTree) -> Result<Self> {
        if values.len() != 3 * tree.len() {
            return Err(Error::JointCountMismatch {
                expected: tree.len(),
                actual: values.len() / 3,
            });
        }
        let joints = values
            .chunks_exact(3)
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        Self::new(joints, frame, tree)
    }

    pub(crate) fn from_parts(joints: Vec<Vector3<f64>>, frame: Frame, skeleton: SkeletonId) -> Self {
        Self {
            joints,
            frame,
            skeleton,
        }
    }

    pub fn joints(&self) -> &[Vector3<f64>] {
        &self.joints
    }

    pub fn into_joints(self) -> Vec<Vector3<f64>> {
        self.joints
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn skeleton(&self) -> SkeletonId {
        self.skeleton
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.joints.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
    }

    pub(crate) fn check_skeleton(&self, tree: &KinematicTree) -> Result<()> {
        if self.skeleton != tree.id() || self.joints.len() != tree.len() {
            return Err(Error::SkeletonMismatch);
        }
        Ok(())
    }
}

/// J keypoints in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose2D {
    points: Vec<Vector2<f64>>,
    skeleton: SkeletonId,
}

impl Pose2D {
    pub fn new(points: Vec<Vector2<f64>>, tree: &KinematicTree) -> Result<Self> {
        if points.len() != tree.len() {
            return Err(Error::JointCountMismatch {
                expected: tree.len(),
                actual: points.len(),
            });
        }
        if let Some(j) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite(j));
        }
        Ok(Self {
            points,
            skeleton: tree.id(),
        })
    }

    pub fn from_flat(values: &[f64], tree: &KinematicTree) -> Result<Self> {
        if values.len() != 2 * tree.len() {
            return Err(Error::JointCountMismatch {
                expected: tree.len(),
                actual: values.len() / 2,
            });
        }
        let points = values
            .chunks_exact(2)
            .map(|c| Vector2::new(c[0], c[1]))
            .collect();
        Self::new(points, tree)
    }

    pub(crate) fn from_parts(points: Vec<Vector2<f64>>, skeleton: SkeletonId) -> Self {
        Self { points, skeleton }
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    pub fn skeleton(&self) -> SkeletonId {
        self.skeleton
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vector2<f64> {
        let sum = self.points.iter().fold(Vector2::zeros(), |acc, p| acc + p);
        sum / self.points.len() as f64
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p.x, p.y]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{build_skeleton, JointDef, SkeletonDef};
    use alloc::borrow::ToOwned;
    use alloc::vec;

    fn tree() -> KinematicTree {
        build_skeleton(&SkeletonDef {
            name: "pair".to_owned(),
            joints: vec![
                JointDef { name: "root".to_owned(), parent: 0 },
                JointDef { name: "tip".to_owned(), parent: 0 },
            ],
            root: 0,
            eval_subset: vec![0, 1],
            symmetry: vec![],
        })
        .unwrap()
    }

    #[test]
    fn construction_checks() {
        let t = tree();
        let nan = vec![Vector3::zeros(), Vector3::new(f64::NAN, 0.0, 0.0)];
        assert_eq!(Pose3D::global(nan, &t).unwrap_err(), Error::NonFinite(1));
        let off = vec![Vector3::new(1.0, 0.0, 0.0), Vector3::zeros()];
        assert_eq!(Pose3D::root_relative(off.clone(), &t).unwrap_err(), Error::RootNotAtOrigin);
        assert!(Pose3D::global(off, &t).is_ok());
        assert!(matches!(
            Pose3D::global(vec![Vector3::zeros()], &t).unwrap_err(),
            Error::JointCountMismatch { expected: 2, actual: 1 }
        ));
    }

    #[test]
    fn flat_roundtrip() {
        let t = tree();
        let p = Pose3D::from_flat(&[0.0, 0.0, 0.0, 1.0, 2.0, 3.0], Frame::RootRelative, &t).unwrap();
        assert_eq!(p.to_flat(), vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0]);
        let k = Pose2D::from_flat(&[1.0, 2.0, 3.0, 4.0], &t).unwrap();
        assert_eq!(k.centroid(), Vector2::new(2.0, 3.0));
    }
}
