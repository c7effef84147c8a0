//! Synthetic poses and camera scenes for tests, demos and benchmarks.
//!
//! Poses come from a rest pose bent joint by joint with random rotations,
//! then turned and scaled as a whole. The result looks roughly human for the
//! common 17-joint naming and stays generic for any other skeleton.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Rotation3, Unit, UnitQuaternion, Vector3};
use rand::Rng;

#[allow(unused_imports)] // supplies f64 math under no_std
use num_traits::Float;

use crate::geometry::{pinhole_project, CameraIntrinsics};
use crate::pose::{Pose2D, Pose3D};
use crate::skeleton::{KinematicTree, SkeletonDef};
use crate::Result;

/// Rest-pose offset (mm, camera axes, person upright facing the camera) for
/// well-known joint names.
fn named_rest(name: &str) -> Option<[f64; 3]> {
    Some(match name {
        "pelvis" | "hip" | "root" => [0.0, 0.0, 0.0],
        "spine" | "thorax_low" => [0.0, -230.0, 10.0],
        "thorax" | "neck" => [0.0, -480.0, 0.0],
        "head" | "nose" => [0.0, -580.0, -20.0],
        "head_top" => [0.0, -700.0, 0.0],
        "r_shoulder" => [-170.0, -460.0, 0.0],
        "r_elbow" => [-195.0, -180.0, 10.0],
        "r_wrist" => [-205.0, 70.0, -20.0],
        "l_shoulder" => [170.0, -460.0, 0.0],
        "l_elbow" => [195.0, -180.0, 10.0],
        "l_wrist" => [205.0, 70.0, -20.0],
        "r_hip" => [-120.0, 0.0, 0.0],
        "r_knee" => [-125.0, 430.0, -15.0],
        "r_ankle" => [-130.0, 860.0, 20.0],
        "l_hip" => [120.0, 0.0, 0.0],
        "l_knee" => [125.0, 430.0, -15.0],
        "l_ankle" => [130.0, 860.0, 20.0],
        _ => return None,
    })
}

/// Rest pose for `def`. Unknown joint names get a 150 mm bone in an
/// index-dependent direction.
pub fn rest_pose(def: &SkeletonDef, tree: &KinematicTree) -> Vec<Vector3<f64>> {
    let n = def.len();
    let mut out = vec![Vector3::zeros(); n];
    for &j in tree.topological_order() {
        if j == tree.root() {
            continue;
        }
        let p = tree.parent1()[j];
        let named = (named_rest(&def.joints[j].name), named_rest(&def.joints[p].name));
        out[j] = match named {
            (Some(a), Some(b)) => out[p] + Vector3::from(a) - Vector3::from(b),
            _ => {
                let a = j as f64 * 2.399;
                out[p] + Vector3::new(a.cos() * 60.0, -120.0, a.sin() * 60.0)
            }
        };
    }
    let root = out[tree.root()];
    out.iter().map(|v| v - root).collect()
}

/// Limb joints bend more than torso joints. Names with a side prefix count
/// as limbs.
pub fn limb_mask(def: &SkeletonDef) -> Vec<bool> {
    def.joints
        .iter()
        .map(|j| j.name.starts_with("l_") || j.name.starts_with("r_"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseSampler {
    rest: Vec<Vector3<f64>>,
    limb: Vec<bool>,
    parents: Vec<usize>,
    order: Vec<usize>,
    root: usize,
    /// Max bend per joint, radians.
    pub torso_angle: f64,
    pub limb_angle: f64,
    /// Range of max joint distance from the pose centroid, mm.
    pub spread: (f64, f64),
    /// Max pitch and roll of the whole body, radians. Yaw is uniform.
    pub tilt: f64,
}

impl PoseSampler {
    pub fn new(def: &SkeletonDef, tree: &KinematicTree) -> Self {
        Self {
            rest: rest_pose(def, tree),
            limb: limb_mask(def),
            parents: tree.parent1().to_vec(),
            order: tree.topological_order().to_vec(),
            root: tree.root(),
            torso_angle: 20f64.to_radians(),
            limb_angle: 80f64.to_radians(),
            spread: (300.0, 1000.0),
            tilt: 0.3,
        }
    }

    /// Root-relative joint positions.
    pub fn sample_joints<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vector3<f64>> {
        let n = self.rest.len();
        let mut world = vec![Rotation3::identity(); n];
        let mut pos = vec![Vector3::zeros(); n];
        for &j in &self.order {
            if j == self.root {
                continue;
            }
            let p = self.parents[j];
            let max = if self.limb[j] { self.limb_angle } else { self.torso_angle };
            let bend = random_axis_rotation(rng, max);
            world[j] = world[p] * bend;
            pos[j] = pos[p] + world[j] * (self.rest[j] - self.rest[p]);
        }
        let body = Rotation3::from_euler_angles(
            rng.random_range(-self.tilt..=self.tilt),
            rng.random_range(-PI..PI),
            rng.random_range(-self.tilt..=self.tilt),
        );
        let centroid = pos.iter().sum::<Vector3<f64>>() / n as f64;
        let radius = pos.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
        let target = rng.random_range(self.spread.0..=self.spread.1);
        let scale = if radius > 0.0 { target / radius } else { 1.0 };
        pos.iter().map(|p| body * p * scale).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, tree: &KinematicTree) -> Result<Pose3D> {
        Pose3D::root_relative(self.sample_joints(rng), tree)
    }
}

/// Rotation about a uniformly random axis by an angle in `[-max, max]`.
pub fn random_axis_rotation<R: Rng + ?Sized>(rng: &mut R, max: f64) -> Rotation3<f64> {
    let axis = random_unit_vector(rng);
    let angle = if max > 0.0 { rng.random_range(-max..=max) } else { 0.0 };
    Rotation3::from_axis_angle(&axis, angle)
}

/// Uniformly distributed rotation.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = nalgebra::Quaternion::new(
        a * (2.0 * PI * u2).cos(),
        a * (2.0 * PI * u2).sin(),
        b * (2.0 * PI * u3).sin(),
        b * (2.0 * PI * u3).cos(),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Unit<Vector3<f64>> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Unit::new_unchecked(Vector3::new(r * phi.cos(), r * phi.sin(), z))
}

/// A root-relative pose placed in front of a camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub pose: Pose3D,
    pub translation: Vector3<f64>,
}

impl Scene {
    pub fn global_joints(&self) -> Vec<Vector3<f64>> {
        self.pose.joints().iter().map(|j| j + self.translation).collect()
    }

    /// Pinhole projection of every joint.
    pub fn project(&self, cam: &CameraIntrinsics, tree: &KinematicTree) -> Result<Pose2D> {
        let pts = self
            .global_joints()
            .iter()
            .map(|p| pinhole_project(p, cam))
            .collect::<Result<Vec<_>>>()?;
        Pose2D::new(pts, tree)
    }

    /// Largest angle between a joint's viewing ray and the optical axis.
    pub fn max_ray_angle(&self) -> f64 {
        self.global_joints()
            .iter()
            .map(|p| (p.x.hypot(p.y)).atan2(p.z))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    /// Root depth range, mm.
    pub depth: (f64, f64),
    /// Lateral root offset as a fraction of depth, per axis.
    pub lateral: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            depth: (2000.0, 8000.0),
            lateral: 0.15,
        }
    }
}

pub fn sample_scene<R: Rng + ?Sized>(
    rng: &mut R,
    sampler: &PoseSampler,
    params: &SceneParams,
    tree: &KinematicTree,
) -> Result<Scene> {
    let pose = sampler.sample(rng, tree)?;
    let z = rng.random_range(params.depth.0..=params.depth.1);
    let l = params.lateral * z;
    let (x, y) = if l > 0.0 {
        (rng.random_range(-l..=l), rng.random_range(-l..=l))
    } else {
        (0.0, 0.0)
    };
    Ok(Scene {
        pose,
        translation: Vector3::new(x, y, z),
    })
}
