use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use poselift_core::analysis::{
    apply_retarget_map, assign_classes, fit_retarget_map, kmeans_poses, retarget_residual, KMeansConfig,
    RetargetOptions,
};
use poselift_core::representations::{fit_fusion_weights, fuse as fuse_poses, FusionSample};
use poselift_core::{KinematicTree, Pose3D, SkeletonDef};
use rayon::prelude::*;

use super::{save, save_with, CliError, Context};
use crate::archive::{read_pose_archive_for, write_pose_archive, ArchiveHeader, PoseArchive, PoseKind};
use crate::artifacts::{load_class_map, ClusterFile, FusionFile, RetargetFile, SkeletonRef};
use crate::skeleton_file::load_skeleton;

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Root-relative 3D archive.
    #[arg(long, value_name = "FILE")]
    pub poses: PathBuf,
    /// Number of clusters.
    #[arg(short, long, default_value_t = 20)]
    pub k: usize,
    /// Upper bound on Lloyd iterations.
    #[arg(long, default_value_t = 300)]
    pub max_iters: usize,
    /// Stop once no centroid moves more than this (mm).
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// JSON object naming each cluster, `{"0": "sitting", ...}`.
    #[arg(long, value_name = "FILE")]
    pub class_map: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum RetargetCommand {
    /// Fit a map from paired source/target frames. `--skeleton` is the source skeleton.
    Fit {
        /// Source-skeleton archive.
        #[arg(long, value_name = "FILE")]
        source: PathBuf,
        /// Target-skeleton archive with the same frames.
        #[arg(long, value_name = "FILE")]
        target: PathBuf,
        /// Target skeleton definition; defaults to the source skeleton.
        #[arg(long, value_name = "FILE")]
        target_skeleton: Option<PathBuf>,
        /// Ridge penalty on the map entries.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Add a per-joint bias column.
        #[arg(long)]
        affine: bool,
    },
    /// Map every frame of a source-skeleton archive to the target skeleton.
    Apply {
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        #[arg(long, value_name = "FILE")]
        poses: PathBuf,
        /// Target skeleton definition; defaults to the source skeleton.
        #[arg(long, value_name = "FILE")]
        target_skeleton: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct FuseInputs {
    /// Direct root-relative estimates.
    #[arg(long, value_name = "FILE")]
    pub direct: PathBuf,
    /// Parent-relative estimates (`parent_relative_1`).
    #[arg(long, value_name = "FILE")]
    pub first: PathBuf,
    /// Grandparent-relative estimates (`parent_relative_2`).
    #[arg(long, value_name = "FILE")]
    pub second: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum FuseCommand {
    /// Fit per-joint weights against ground truth.
    Fit {
        #[command(flatten)]
        inputs: FuseInputs,
        /// Root-relative ground truth.
        #[arg(long, value_name = "FILE")]
        truth: PathBuf,
        /// Ridge penalty pulling weights toward (1/3, 1/3, 1/3).
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Fuse estimates with fitted weights.
    Apply {
        #[command(flatten)]
        inputs: FuseInputs,
        #[arg(long, value_name = "FILE")]
        weights: PathBuf,
    },
}

fn root_relative_poses(path: &Path, tree: &KinematicTree) -> Result<(PoseArchive, Vec<Pose3D>), CliError> {
    let archive = read_pose_archive_for(path, tree)?;
    poses_of(archive, path, tree, &[PoseKind::RootRelative])
}

fn poses_of(archive: PoseArchive, path: &Path, tree: &KinematicTree, kinds: &[PoseKind]) -> Result<(PoseArchive, Vec<Pose3D>), CliError> {
    if !kinds.contains(&archive.header.kind) {
        let names: Vec<_> = kinds.iter().map(|k| k.as_str()).collect();
        return Err(CliError::input(format!("{}: expected a {} archive", path.display(), names.join(" or "))));
    }
    let poses = (0..archive.len())
        .map(|i| {
            archive
                .pose3d(i, tree)
                .map_err(|e| CliError::core(format!("{} frame {}", path.display(), archive.records()[i].frame), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((archive, poses))
}

pub(super) fn cluster(ctx: &Context, args: ClusterArgs) -> Result<(), CliError> {
    let (archive, poses) = root_relative_poses(&args.poses, &ctx.tree)?;
    let out = ctx.out()?;
    let class_map = args.class_map.as_deref().map(load_class_map).transpose()?;
    let mut config = KMeansConfig::new(args.k, ctx.seed);
    config.max_iters = args.max_iters;
    config.tol = args.tol;
    let mut clusters = kmeans_poses(&poses, &config).map_err(|e| CliError::core("cluster", e))?;
    if let Some(m) = &class_map {
        clusters = assign_classes(&clusters, m).map_err(|e| CliError::core("--class-map", e))?;
    }
    let frames: Vec<u64> = archive.frames().collect();
    let file = ClusterFile::new(&clusters, &frames, SkeletonRef::new(&ctx.def, &ctx.tree));
    save(out, &file.to_json())?;
    println!(
        "cluster: {} poses, k = {}, {} iterations, inertia {}",
        poses.len(),
        clusters.k,
        clusters.iterations,
        clusters.inertia
    );
    Ok(())
}

fn target_skeleton(ctx: &Context, path: Option<&Path>) -> Result<(SkeletonDef, KinematicTree), CliError> {
    match path {
        Some(p) => Ok(load_skeleton(p)?),
        None => Ok((ctx.def.clone(), ctx.tree.clone())),
    }
}

pub(super) fn retarget(ctx: &Context, command: RetargetCommand) -> Result<(), CliError> {
    let out = ctx.out()?;
    match command {
        RetargetCommand::Fit {
            source,
            target,
            target_skeleton: tgt_skel,
            lambda,
            affine,
        } => {
            let (tdef, ttree) = target_skeleton(ctx, tgt_skel.as_deref())?;
            let any3d = [PoseKind::RootRelative, PoseKind::CameraGlobal];
            let (sa, src) = poses_of(read_pose_archive_for(&source, &ctx.tree)?, &source, &ctx.tree, &any3d)?;
            let (ta, tgt) = poses_of(read_pose_archive_for(&target, &ttree)?, &target, &ttree, &any3d)?;
            if sa.frames().ne(ta.frames()) {
                return Err(CliError::input("source and target archives cover different frames"));
            }
            let options = RetargetOptions {
                ridge_lambda: lambda,
                affine,
            };
            let map = fit_retarget_map(&src, &tgt, options).map_err(|e| CliError::core("retarget fit", e))?;
            let residual = retarget_residual(&map, &src, &tgt).map_err(|e| CliError::core("retarget fit", e))?;
            let file = RetargetFile::new(&map, SkeletonRef::new(&ctx.def, &ctx.tree), SkeletonRef::new(&tdef, &ttree), lambda);
            save(out, &file.to_json())?;
            println!("retarget fit: {} frames, residual {residual}", src.len());
        }
        RetargetCommand::Apply {
            map,
            poses,
            target_skeleton: tgt_skel,
        } => {
            let (tdef, ttree) = target_skeleton(ctx, tgt_skel.as_deref())?;
            let file = RetargetFile::load(&map)?;
            let m = file.to_map(&map)?;
            if m.source() != ctx.tree.id() || m.target() != ttree.id() {
                return Err(CliError::input(format!("{}: map was fitted for other skeletons", map.display())));
            }
            let any3d = [PoseKind::RootRelative, PoseKind::CameraGlobal];
            let (archive, src) = poses_of(read_pose_archive_for(&poses, &ctx.tree)?, &poses, &ctx.tree, &any3d)?;
            // a root-relative input stays root-relative: the mapped root is
            // subtracted again
            let recenter = archive.header.kind == PoseKind::RootRelative;
            let mapped: Vec<_> = src
                .par_iter()
                .map(|p| {
                    let q = apply_retarget_map(&m, p, &ttree)?;
                    if recenter {
                        let root = q.joints()[ttree.root()];
                        Pose3D::root_relative(q.joints().iter().map(|j| j - root).collect(), &ttree)
                    } else {
                        Ok(q)
                    }
                })
                .collect();
            let mut result = PoseArchive::new(ArchiveHeader {
                camera: archive.header.camera.clone(),
                ..ArchiveHeader::new(&tdef, &ttree, archive.header.kind)
            });
            for (rec, pose) in archive.records().iter().zip(mapped) {
                let pose = pose.map_err(|e| CliError::core(format!("frame {}", rec.frame), e))?;
                result
                    .push_pose3d(rec.frame, &pose, rec.labels.clone())
                    .map_err(|e| CliError::runtime(format!("frame {}: {e}", rec.frame)))?;
            }
            save_with(|| write_pose_archive(&result, out))?;
            println!("retarget apply: {} frames", result.len());
        }
    }
    Ok(())
}

struct FuseData {
    direct: PoseArchive,
    p: Vec<Pose3D>,
    o1: Vec<poselift_core::representations::RelPose>,
    o2: Vec<poselift_core::representations::RelPose>,
}

fn load_fuse_inputs(ctx: &Context, inputs: &FuseInputs) -> Result<FuseData, CliError> {
    let tree = &ctx.tree;
    let (direct, p) = root_relative_poses(&inputs.direct, tree)?;
    let rel = |path: &Path, kind: PoseKind| -> Result<_, CliError> {
        let a = read_pose_archive_for(path, tree)?;
        if a.header.kind != kind {
            return Err(CliError::input(format!("{}: expected a {} archive", path.display(), kind.as_str())));
        }
        if a.frames().ne(direct.frames()) {
            return Err(CliError::input(format!("{}: frames differ from {}", path.display(), inputs.direct.display())));
        }
        (0..a.len())
            .map(|i| a.rel_pose(i, tree).map_err(|e| CliError::core(format!("{} frame {}", path.display(), a.records()[i].frame), e)))
            .collect::<Result<Vec<_>, _>>()
    };
    let o1 = rel(&inputs.first, PoseKind::ParentRelative1)?;
    let o2 = rel(&inputs.second, PoseKind::ParentRelative2)?;
    Ok(FuseData { direct, p, o1, o2 })
}

pub(super) fn fuse(ctx: &Context, command: FuseCommand) -> Result<(), CliError> {
    let out = ctx.out()?;
    let tree = &ctx.tree;
    match command {
        FuseCommand::Fit { inputs, truth, lambda } => {
            let d = load_fuse_inputs(ctx, &inputs)?;
            let (ta, truth_poses) = root_relative_poses(&truth, tree)?;
            if ta.frames().ne(d.direct.frames()) {
                return Err(CliError::input(format!("{}: frames differ from the estimates", truth.display())));
            }
            let samples: Vec<FusionSample> = d
                .p
                .into_iter()
                .zip(d.o1)
                .zip(d.o2)
                .zip(truth_poses)
                .map(|(((p, o1), o2), truth)| FusionSample { p, o1, o2, truth })
                .collect();
            let w = fit_fusion_weights(&samples, tree, lambda).map_err(|e| CliError::core("fuse fit", e))?;
            let file = FusionFile {
                skeleton: SkeletonRef::new(&ctx.def, tree),
                ridge_lambda: lambda,
                samples: samples.len(),
                weights: w.rows().to_vec(),
            };
            save(out, &file.to_json())?;
            println!("fuse fit: {} frames", samples.len());
        }
        FuseCommand::Apply { inputs, weights } => {
            let d = load_fuse_inputs(ctx, &inputs)?;
            let file = FusionFile::load(&weights)?;
            if file.skeleton.id != tree.id().to_string() {
                return Err(CliError::input(format!("{}: weights were fitted for skeleton `{}`", weights.display(), file.skeleton.name)));
            }
            let w = file.to_weights(&weights)?;
            let fused: Vec<_> = (0..d.p.len())
                .into_par_iter()
                .map(|i| fuse_poses(&d.p[i], &d.o1[i], &d.o2[i], &w, tree))
                .collect();
            let mut result = PoseArchive::new(ArchiveHeader::new(&ctx.def, tree, PoseKind::RootRelative));
            for (rec, pose) in d.direct.records().iter().zip(fused) {
                let pose = pose.map_err(|e| CliError::core(format!("frame {}", rec.frame), e))?;
                result
                    .push_pose3d(rec.frame, &pose, rec.labels.clone())
                    .map_err(|e| CliError::runtime(format!("frame {}: {e}", rec.frame)))?;
            }
            save_with(|| write_pose_archive(&result, out))?;
            println!("fuse apply: {} frames", result.len());
        }
    }
    Ok(())
}
