use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::pose::Pose3D;
use crate::{Error, Result};

/// Least-squares alignment applied to a prediction before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlignMode {
    /// Match centroids.
    Translation,
    /// Uniform scale about the centroid, then match centroids.
    ScaleTranslation,
    /// Full similarity transform (orthogonal Procrustes, det +1).
    Similarity,
}

/// Returns `pred` mapped onto `gt` by the least-squares transform of `mode`.
///
/// The output carries `gt`'s frame tag. It is not re-centered on the root.
pub fn align(pred: &Pose3D, gt: &Pose3D, mode: AlignMode) -> Result<Pose3D> {
    if pred.skeleton() != gt.skeleton() || pred.len() != gt.len() {
        return Err(Error::SkeletonMismatch);
    }
    let n = pred.len() as f64;
    let mean_p = pred.joints().iter().fold(Vector3::zeros(), |a, p| a + p) / n;
    let mean_g = gt.joints().iter().fold(Vector3::zeros(), |a, p| a + p) / n;
    let src: Vec<Vector3<f64>> = pred.joints().iter().map(|p| p - mean_p).collect();

    let (scale, rotation) = match mode {
        AlignMode::Translation => (1.0, Matrix3::identity()),
        AlignMode::ScaleTranslation => {
            let norm: f64 = src.iter().map(|p| p.norm_squared()).sum();
            let cross: f64 = src
                .iter()
                .zip(gt.joints())
                .map(|(p, g)| p.dot(&(g - mean_g)))
                .sum();
            let scale = if norm > 0.0 { cross / norm } else { 1.0 };
            (scale, Matrix3::identity())
        }
        AlignMode::Similarity => similarity(&src, gt.joints(), &mean_g)?,
    };

    let joints = src.iter().map(|p| rotation * p * scale + mean_g).collect();
    Ok(Pose3D::from_parts(joints, gt.frame(), gt.skeleton()))
}

/// Umeyama's closed form: rotation from the SVD of the cross-covariance with
/// the reflection case folded into the smallest singular direction.
fn similarity(src: &[Vector3<f64>], dst: &[Vector3<f64>], mean_dst: &Vector3<f64>) -> Result<(f64, Matrix3<f64>)> {
    if src.len() < 3 {
        return Err(Error::DegenerateConfiguration);
    }
    let mut scatter = Matrix3::zeros();
    let mut cross = Matrix3::zeros();
    for (p, g) in src.iter().zip(dst) {
        scatter += p * p.transpose();
        cross += (g - mean_dst) * p.transpose();
    }
    // Collinear or coincident source joints leave the rotation about the
    // line undetermined.
    let mut spread = scatter.symmetric_eigenvalues();
    spread.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    if !(spread[0] > 0.0) || spread[1] <= spread[0] * 1e-12 {
        return Err(Error::DegenerateConfiguration);
    }

    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateConfiguration),
    };
    let mut sign = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        let smallest = svd.singular_values.imin();
        sign[(smallest, smallest)] = -1.0;
    }
    let rotation = u * sign * v_t;
    let trace: f64 = (0..3).map(|i| svd.singular_values[i] * sign[(i, i)]).sum();
    let scale = trace / spread.iter().sum::<f64>();
    Ok((scale, rotation))
}
