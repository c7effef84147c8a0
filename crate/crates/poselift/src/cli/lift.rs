use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use log::{info, warn};
use poselift_core::geometry::{
    lift_global, perspective_correction, project_pose, weak_perspective_project, CameraIntrinsics, CropBox, DepthMode,
    RigidTransform, ViewSource,
};
use poselift_core::{Pose2D, Pose3D, Vector2};
use rayon::prelude::*;

use super::{save_with, CliError, Context};
use crate::archive::{read_pose_archive_for, write_pose_archive, ArchiveHeader, PoseArchive, PoseKind};
use crate::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjectionModel {
    /// Full perspective division per joint.
    Pinhole,
    /// Every joint divided by the root depth.
    Weak,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Camera-space 3D archive (`camera_global`).
    #[arg(long, value_name = "FILE")]
    pub poses: PathBuf,
    /// Camera id in the calibration file; defaults to the archive's camera.
    #[arg(long)]
    pub camera: Option<String>,
    #[arg(long, value_enum, default_value_t = ProjectionModel::Pinhole)]
    pub model: ProjectionModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DepthArg {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    /// View direction through the keypoint centroid.
    Centroid,
    /// View direction through the crop center (needs --crops).
    Crop,
    /// No rotation.
    Off,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Root-relative 3D archive (`root_relative`).
    #[arg(long, value_name = "FILE")]
    pub poses: PathBuf,
    /// 2D keypoint archive with the same frames.
    #[arg(long, value_name = "FILE")]
    pub keypoints: PathBuf,
    /// Camera id in the calibration file; defaults to the keypoint archive's camera.
    #[arg(long)]
    pub camera: Option<String>,
    #[arg(long, value_enum, default_value_t = DepthArg::Exact)]
    pub depth_mode: DepthArg,
    #[arg(long, value_enum, default_value_t = CorrectionArg::Centroid)]
    pub correction: CorrectionArg,
    /// Same as `--correction off`.
    #[arg(long, conflicts_with = "correction")]
    pub no_persp_correction: bool,
    /// Crop boxes as CSV with columns `frame,cx,cy,width,height`.
    #[arg(long, value_name = "FILE")]
    pub crops: Option<PathBuf>,
}

pub(super) fn project(ctx: &Context, args: ProjectArgs) -> Result<(), CliError> {
    let tree = &ctx.tree;
    let poses = read_pose_archive_for(&args.poses, tree)?;
    if poses.header.kind != PoseKind::CameraGlobal {
        return Err(CliError::input(format!("{}: expected a camera_global archive", args.poses.display())));
    }
    let out = ctx.out()?;
    let (cam_id, cam) = ctx
        .calibration()?
        .resolve(args.camera.as_deref(), poses.header.camera.as_deref())
        .map_err(CliError::input)?;
    let projected: Vec<Result<Pose2D, CliError>> = (0..poses.len())
        .into_par_iter()
        .map(|i| {
            let frame = poses.records()[i].frame;
            let context = || format!("{} frame {frame}", args.poses.display());
            let pose = poses.pose3d(i, tree).map_err(|e| CliError::core(context(), e))?;
            let k = match args.model {
                ProjectionModel::Pinhole => project_pose(&pose, &cam, tree),
                ProjectionModel::Weak => weak_about_root(&pose, &cam, ctx),
            };
            k.map_err(|e| CliError::core(context(), e))
        })
        .collect();
    let mut archive = PoseArchive::new(ArchiveHeader::new(&ctx.def, tree, PoseKind::Keypoints).with_camera(cam_id));
    for (rec, k) in poses.records().iter().zip(projected) {
        archive
            .push_pose2d(rec.frame, &k?, rec.labels.clone())
            .map_err(|e| CliError::input(format!("frame {}: {e}", rec.frame)))?;
    }
    save_with(|| write_pose_archive(&archive, out))?;
    println!("project: {} frames", archive.len());
    Ok(())
}

fn weak_about_root(pose: &Pose3D, cam: &CameraIntrinsics, ctx: &Context) -> poselift_core::Result<Pose2D> {
    let root = pose.joints()[ctx.tree.root()];
    let rel = Pose3D::root_relative(pose.joints().iter().map(|p| p - root).collect(), &ctx.tree)?;
    weak_perspective_project(&rel, &root, cam, &ctx.tree)
}

fn read_crops(path: &Path, cam: &CameraIntrinsics) -> Result<BTreeMap<u64, CropBox>, CliError> {
    #[derive(serde::Deserialize)]
    struct Row {
        frame: u64,
        cx: f64,
        cy: f64,
        width: f64,
        height: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut crops = BTreeMap::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| CliError::from(IoError::parse(path, line_of(&e), e.to_string())))?;
        let crop = CropBox::new(Vector2::new(row.cx, row.cy), row.width, row.height, cam)
            .map_err(|e| CliError::core(format!("{} frame {}", path.display(), row.frame), e))?;
        crops.insert(row.frame, crop);
    }
    Ok(crops)
}

fn line_of(e: &csv::Error) -> crate::Location {
    e.position().map_or_else(crate::Location::default, |p| crate::Location::line(p.line()))
}

pub(super) fn lift(ctx: &Context, args: LiftArgs) -> Result<(), CliError> {
    let tree = &ctx.tree;
    let poses = read_pose_archive_for(&args.poses, tree)?;
    let keypoints = read_pose_archive_for(&args.keypoints, tree)?;
    if poses.header.kind != PoseKind::RootRelative {
        return Err(CliError::input(format!("{}: expected a root_relative archive", args.poses.display())));
    }
    if keypoints.header.kind != PoseKind::Keypoints {
        return Err(CliError::input(format!("{}: expected a keypoints archive", args.keypoints.display())));
    }
    if poses.is_empty() {
        return Err(CliError::input(format!("{}: empty archive, nothing to lift", args.poses.display())));
    }
    if let Some((a, b)) = poses.frames().zip(keypoints.frames()).find(|(a, b)| a != b) {
        return Err(CliError::input(format!("frame {a} of the pose archive meets frame {b} of the keypoint archive")));
    }
    if poses.len() != keypoints.len() {
        return Err(CliError::input(format!(
            "pose archive has {} frames, keypoint archive has {}",
            poses.len(),
            keypoints.len()
        )));
    }
    let out = ctx.out()?;
    let (cam_id, cam) = ctx
        .calibration()?
        .resolve(args.camera.as_deref(), keypoints.header.camera.as_deref())
        .map_err(CliError::input)?;
    let correction = if args.no_persp_correction { CorrectionArg::Off } else { args.correction };
    let crops = match (correction, &args.crops) {
        (CorrectionArg::Crop, Some(p)) => read_crops(p, &cam)?,
        (CorrectionArg::Crop, None) => return Err(CliError::input("--correction crop needs --crops")),
        _ => BTreeMap::new(),
    };
    let mode = match args.depth_mode {
        DepthArg::Exact => DepthMode::Exact,
        DepthArg::Approx => DepthMode::Approx,
    };

    let mut inputs = Vec::with_capacity(poses.len());
    for i in 0..poses.len() {
        let frame = poses.records()[i].frame;
        let pose = poses
            .pose3d(i, tree)
            .map_err(|e| CliError::core(format!("{} frame {frame}", args.poses.display()), e))?;
        let k = keypoints
            .pose2d(i, tree)
            .map_err(|e| CliError::core(format!("{} frame {frame}", args.keypoints.display()), e))?;
        let r = match correction {
            CorrectionArg::Off => RigidTransform::identity(),
            CorrectionArg::Centroid => perspective_correction(ViewSource::Keypoints(&k), &cam),
            CorrectionArg::Crop => {
                let crop = crops
                    .get(&frame)
                    .ok_or_else(|| CliError::input(format!("no crop box for frame {frame}")))?;
                perspective_correction(ViewSource::Crop(crop), &cam)
            }
        };
        inputs.push((pose, k, r));
    }
    let lifted: Vec<_> = inputs
        .par_iter()
        .map(|(pose, k, r)| lift_global(pose, k, &cam, r, mode, tree))
        .collect();

    let mut archive = PoseArchive::new(ArchiveHeader::new(&ctx.def, tree, PoseKind::CameraGlobal).with_camera(cam_id));
    let mut failed = 0;
    for (rec, result) in poses.records().iter().zip(lifted) {
        match result {
            Ok((_, global)) => archive
                .push_pose3d(rec.frame, &global, rec.labels.clone())
                .map_err(|e| CliError::runtime(format!("frame {}: {e}", rec.frame)))?,
            Err(e) => {
                warn!("frame {}: skipped: {e}", rec.frame);
                failed += 1;
            }
        }
    }
    let summary = format!("lift: {} frames, {} lifted, {failed} failed", poses.len(), archive.len());
    if archive.is_empty() {
        return Err(CliError::runtime(format!("{summary}; no output written")));
    }
    save_with(|| write_pose_archive(&archive, out))?;
    info!("wrote {}", out.display());
    println!("{summary}");
    Ok(())
}
