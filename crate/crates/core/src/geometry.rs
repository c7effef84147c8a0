//! Camera geometry: projection models, closed-form global localization and
//! perspective correction.
//!
//! All pixel formulas work on coordinates shifted by the principal point;
//! the public API takes raw pixels plus [`CameraIntrinsics`].
//!
//! Localization minimizes, over the translation `T = (x, y, z)`,
//!
//! ```text
//! E(x, y, z) = sum_i | K_i - (f / z) * ((x, y) + P_i,xy) |^2
//! ```
//!
//! which is the reprojection error of the root-relative pose `P` under weak
//! perspective about depth `z`. For fixed `z` the optimal `x, y` align the
//! means: `x = mean(K).x * z / f - mean(P).x`. Substituting back leaves a
//! one-dimensional problem in `z` with the unique stationary point
//!
//! ```text
//! z = f * sum |dP_xy|^2 / sum dK . dP_xy          (DepthMode::Exact)
//! ```
//!
//! where `dK`, `dP` are offsets from the respective means. Assuming the 2D
//! and 3D offsets are parallel turns the denominator into a product of norms:
//!
//! ```text
//! z ~ f * sqrt(sum |dP_xy|^2) / sqrt(sum |dK|^2)  (DepthMode::Approx)
//! ```
//!
//! The two differ by exactly the cosine of the angle between the stacked
//! offset vectors, `z_approx = cos(phi) * z_exact`.

use alloc::vec::Vec;

#[allow(unused_imports)] // supplies f64 math under no_std
use num_traits::Float;

use nalgebra::{Matrix3, Rotation3, Vector2, Vector3};

use crate::pose::{Frame, Pose2D, Pose3D};
use crate::skeleton::KinematicTree;
use crate::{Error, Result};

/// Centered spreads (sum of squares, px^2 or mm^2) below this are degenerate.
pub const MIN_SPREAD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    f: f64,
    principal_point: Vector2<f64>,
    width: u32,
    height: u32,
}

impl CameraIntrinsics {
    pub fn new(f: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::InvalidIntrinsics("focal length must be positive"));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::InvalidIntrinsics("principal point must be finite"));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidIntrinsics("image size must be positive"));
        }
        Ok(Self {
            f,
            principal_point: Vector2::new(cx, cy),
            width,
            height,
        })
    }

    pub fn focal(&self) -> f64 {
        self.f
    }

    pub fn principal_point(&self) -> Vector2<f64> {
        self.principal_point
    }

    pub fn image_size(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// Crop rectangle in pixels; the crop center defines a virtual view direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropBox {
    center: Vector2<f64>,
    width: f64,
    height: f64,
}

impl CropBox {
    pub fn new(center: Vector2<f64>, width: f64, height: f64, cam: &CameraIntrinsics) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidCrop("extent must be positive"));
        }
        let (w, h) = cam.image_size();
        if !(center.x >= 0.0 && center.x <= f64::from(w) && center.y >= 0.0 && center.y <= f64::from(h)) {
            return Err(Error::InvalidCrop("center outside the image"));
        }
        Ok(Self { center, width, height })
    }

    pub fn center(&self) -> Vector2<f64> {
        self.center
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.width, self.height)
    }
}

/// Proper rigid motion `x -> R x + t` (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Rotation3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if !(ortho <= 1e-9) || !((rotation.determinant() - 1.0).abs() <= 1e-9) || !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::NotARotation);
        }
        Ok(Self {
            rotation: Rotation3::from_matrix_unchecked(rotation),
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Rotation3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.translation
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }
}

pub fn pinhole_project(point: &Vector3<f64>, cam: &CameraIntrinsics) -> Result<Vector2<f64>> {
    if !(point.z > 0.0) {
        return Err(Error::BehindCamera(point.z));
    }
    Ok(Vector2::new(point.x, point.y) * (cam.f / point.z) + cam.principal_point)
}

/// Projects `pose + t` with the uniform scale `f / t.z`.
pub fn weak_perspective_project(
    pose: &Pose3D,
    t: &Vector3<f64>,
    cam: &CameraIntrinsics,
    tree: &KinematicTree,
) -> Result<Pose2D> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::RootRelative {
        return Err(Error::WrongFrame);
    }
    if !(t.z > 0.0) {
        return Err(Error::BehindCamera(t.z));
    }
    let scale = cam.f / t.z;
    let points = pose
        .joints()
        .iter()
        .map(|p| Vector2::new(p.x + t.x, p.y + t.y) * scale + cam.principal_point)
        .collect();
    Ok(Pose2D::from_parts(points, tree.id()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DepthMode {
    /// Stationary point of the weak-perspective objective.
    #[default]
    Exact,
    /// Ratio-of-norms form that assumes parallel 2D/3D offsets.
    Approx,
}

/// Means and centered second moments shared by the depth and translation
/// estimates.
struct Moments {
    mean_k: Vector2<f64>,
    mean_p: Vector3<f64>,
    spread_k: f64,
    spread_p: f64,
    cross: f64,
}

fn moments(pose: &Pose3D, k2d: &Pose2D, cam: &CameraIntrinsics, tree: &KinematicTree) -> Result<Moments> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::RootRelative {
        return Err(Error::WrongFrame);
    }
    if k2d.skeleton() != tree.id() || k2d.len() != tree.len() {
        return Err(Error::SkeletonMismatch);
    }
    let n = tree.len() as f64;
    let shifted: Vec<Vector2<f64>> = k2d.points().iter().map(|k| k - cam.principal_point).collect();
    let mean_k = shifted.iter().fold(Vector2::zeros(), |a, k| a + k) / n;
    let mean_p = pose.joints().iter().fold(Vector3::zeros(), |a, p| a + p) / n;
    let (mut spread_k, mut spread_p, mut cross) = (0.0, 0.0, 0.0);
    for (k, p) in shifted.iter().zip(pose.joints()) {
        let dk = k - mean_k;
        let dp = Vector2::new(p.x - mean_p.x, p.y - mean_p.y);
        spread_k += dk.norm_squared();
        spread_p += dp.norm_squared();
        cross += dk.dot(&dp);
    }
    if spread_k < MIN_SPREAD {
        return Err(Error::DegenerateSpread("2D keypoints"));
    }
    if spread_p < MIN_SPREAD {
        return Err(Error::DegenerateSpread("3D pose"));
    }
    Ok(Moments {
        mean_k,
        mean_p,
        spread_k,
        spread_p,
        cross,
    })
}

fn depth_from(m: &Moments, f: f64, mode: DepthMode) -> Result<f64> {
    match mode {
        DepthMode::Exact => {
            if !(m.cross > 0.0) {
                return Err(Error::NonPositiveDepth);
            }
            Ok(f * m.spread_p / m.cross)
        }
        DepthMode::Approx => Ok(f * (m.spread_p / m.spread_k).sqrt()),
    }
}

/// Depth (mm) of the root-relative pose that best explains the keypoints.
pub fn estimate_depth(
    pose: &Pose3D,
    k2d: &Pose2D,
    cam: &CameraIntrinsics,
    mode: DepthMode,
    tree: &KinematicTree,
) -> Result<f64> {
    let m = moments(pose, k2d, cam, tree)?;
    depth_from(&m, cam.f, mode)
}

/// Closed-form global translation aligning `pose` with `k2d`.
pub fn estimate_global_translation(
    pose: &Pose3D,
    k2d: &Pose2D,
    cam: &CameraIntrinsics,
    mode: DepthMode,
    tree: &KinematicTree,
) -> Result<Vector3<f64>> {
    let m = moments(pose, k2d, cam, tree)?;
    let z = depth_from(&m, cam.f, mode)?;
    Ok(Vector3::new(
        m.mean_k.x * z / cam.f - m.mean_p.x,
        m.mean_k.y * z / cam.f - m.mean_p.y,
        z,
    ))
}

/// Source of the virtual view direction for [`perspective_correction`].
#[derive(Debug, Clone, Copy)]
pub enum ViewSource<'a> {
    /// Ray through the centroid of the 2D keypoints.
    Keypoints(&'a Pose2D),
    /// Ray through the crop center.
    Crop(&'a CropBox),
}

/// Rotation taking virtual-camera coordinates (camera looking at the view
/// source) back to the original camera. Only the horizontal component of the
/// view direction is corrected, so the result is a rotation about the
/// camera up axis by `atan2(u - cx, f)`.
pub fn perspective_correction(source: ViewSource<'_>, cam: &CameraIntrinsics) -> RigidTransform {
    let u = match source {
        ViewSource::Keypoints(k) => k.centroid().x,
        ViewSource::Crop(c) => c.center.x,
    };
    let angle = (u - cam.principal_point.x).atan2(cam.f);
    RigidTransform {
        rotation: Rotation3::from_axis_angle(&Vector3::y_axis(), angle),
        translation: Vector3::zeros(),
    }
}

/// Yaw angle (radians) of a rotation produced by [`perspective_correction`].
pub fn correction_angle(rt: &RigidTransform) -> f64 {
    let m = rt.rotation.matrix();
    m[(0, 2)].atan2(m[(2, 2)])
}

/// `joints[j] = R (pose[j]) + R.t + t`, tagged as camera-global.
pub fn compose_global(
    rotation: &RigidTransform,
    translation: &Vector3<f64>,
    pose: &Pose3D,
    tree: &KinematicTree,
) -> Result<Pose3D> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::RootRelative {
        return Err(Error::WrongFrame);
    }
    let offset = rotation.translation + translation;
    let joints = pose
        .joints()
        .iter()
        .map(|p| rotation.rotation * p + offset)
        .collect();
    Ok(Pose3D::from_parts(joints, Frame::CameraGlobal, tree.id()))
}

/// Full lifting step: rotate the root-relative pose by `correction`, find the
/// translation that explains `k2d`, and place the rotated pose there.
/// Returns the translation and the camera-global pose.
pub fn lift_global(
    pose: &Pose3D,
    k2d: &Pose2D,
    cam: &CameraIntrinsics,
    correction: &RigidTransform,
    mode: DepthMode,
    tree: &KinematicTree,
) -> Result<(Vector3<f64>, Pose3D)> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::RootRelative {
        return Err(Error::WrongFrame);
    }
    let rotated = Pose3D::from_parts(
        pose.joints().iter().map(|p| correction.rotation * p).collect(),
        Frame::RootRelative,
        tree.id(),
    );
    let t = estimate_global_translation(&rotated, k2d, cam, mode, tree)?;
    let global = compose_global(correction, &t, pose, tree)?;
    Ok((t, global))
}

/// Pinhole reprojection of a global pose, joint by joint.
pub fn project_pose(pose: &Pose3D, cam: &CameraIntrinsics, tree: &KinematicTree) -> Result<Pose2D> {
    pose.check_skeleton(tree)?;
    if pose.frame() != Frame::CameraGlobal {
        return Err(Error::WrongFrame);
    }
    let points = pose
        .joints()
        .iter()
        .map(|p| pinhole_project(p, cam))
        .collect::<Result<Vec<_>>>()?;
    Ok(Pose2D::from_parts(points, tree.id()))
}

/// Mean pixel distance between two keypoint sets.
pub fn reprojection_error(a: &Pose2D, b: &Pose2D) -> Result<f64> {
    if a.skeleton() != b.skeleton() || a.len() != b.len() {
        return Err(Error::SkeletonMismatch);
    }
    let total: f64 = a.points().iter().zip(b.points()).map(|(p, q)| (p - q).norm()).sum();
    Ok(total / a.len() as f64)
}
