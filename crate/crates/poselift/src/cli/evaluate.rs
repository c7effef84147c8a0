use std::path::PathBuf;

use clap::{Args, ValueEnum};
use log::warn;
use poselift_core::metrics::{
    frame_eval, AlignMode, EvalAccumulator, EvalConfig, EvalFrame, FrameLabels, ThresholdRange, DEFAULT_PCK_THRESHOLD,
};
use rayon::prelude::*;

use super::{parse_range, save, CliError, Context};
use crate::archive::{read_pose_archive_for, PoseKind};
use crate::artifacts::ClusterFile;
use crate::report::{report_csv, report_json};

/// Frames per accumulator chunk. Chunks are merged in order, so results do
/// not depend on the thread count.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignArg {
    None,
    /// Translation.
    T,
    /// Scale and translation.
    St,
    /// Rotation, scale and translation.
    Rst,
}

impl AlignArg {
    fn mode(self) -> Option<AlignMode> {
        match self {
            AlignArg::None => None,
            AlignArg::T => Some(AlignMode::Translation),
            AlignArg::St => Some(AlignMode::ScaleTranslation),
            AlignArg::Rst => Some(AlignMode::Similarity),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            AlignArg::None => "none",
            AlignArg::T => "t",
            AlignArg::St => "st",
            AlignArg::Rst => "rst",
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted poses.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Ground-truth poses; its activity/scene/subject labels define buckets.
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,
    /// PCK threshold in mm.
    #[arg(long, default_value_t = DEFAULT_PCK_THRESHOLD)]
    pub threshold: f64,
    /// AUC threshold grid `min:max:step` in mm.
    #[arg(long, default_value = "0:150:5")]
    pub auc_range: String,
    /// Score every n-th frame, starting with the first.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Alignment applied to each prediction before scoring.
    #[arg(long, value_enum, default_value_t = AlignArg::None)]
    pub align: AlignArg,
    /// Cluster file with a class map; adds per-class buckets.
    #[arg(long, value_name = "FILE")]
    pub classes: Option<PathBuf>,
}

pub(super) fn evaluate(ctx: &Context, args: EvaluateArgs) -> Result<(), CliError> {
    let tree = &ctx.tree;
    let pred = read_pose_archive_for(&args.pred, tree)?;
    let gt = read_pose_archive_for(&args.gt, tree)?;
    for (a, path) in [(&pred, &args.pred), (&gt, &args.gt)] {
        if !matches!(a.header.kind, PoseKind::RootRelative | PoseKind::CameraGlobal) {
            return Err(CliError::input(format!("{}: expected 3D joint positions", path.display())));
        }
    }
    if pred.header.kind != gt.header.kind {
        return Err(CliError::input(format!(
            "prediction is {} but ground truth is {}",
            pred.header.kind.as_str(),
            gt.header.kind.as_str()
        )));
    }
    if pred.len() != gt.len() || pred.frames().ne(gt.frames()) {
        return Err(CliError::input("prediction and ground truth cover different frames"));
    }
    if gt.is_empty() {
        return Err(CliError::input(format!("{}: empty archive", args.gt.display())));
    }
    let (lo, hi, step) = parse_range(&args.auc_range).map_err(|e| CliError::input(format!("--auc-range: {e}")))?;
    let mut config = EvalConfig::new(ctx.def.eval_subset.clone());
    config.threshold = args.threshold;
    config.auc_range = ThresholdRange::new(lo, hi, step).map_err(|e| CliError::core("--auc-range", e))?;
    config.stride = args.stride;
    config.alignment = args.align.mode();
    for g in &ctx.def.symmetry {
        let joints = g.joints();
        if joints.iter().all(|j| config.subset.contains(j)) {
            config.joint_groups.push((g.name.clone(), joints));
        } else {
            warn!("joint group `{}` reaches outside the evaluation subset; not reported", g.name);
        }
    }
    let classes = match &args.classes {
        Some(p) => Some(
            ClusterFile::load(p)?
                .frame_classes()
                .ok_or_else(|| CliError::input(format!("{}: cluster file has no class map", p.display())))?,
        ),
        None => None,
    };
    // validates threshold, stride and groups before any work
    let empty = EvalAccumulator::new(&config).map_err(|e| CliError::core("evaluate", e))?;

    let sampled: Vec<usize> = (0..gt.len()).step_by(args.stride).collect();
    let chunks: Vec<Result<EvalAccumulator, CliError>> = sampled
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = empty.clone();
            for &i in chunk {
                let rec = &gt.records()[i];
                let context = || format!("frame {}", rec.frame);
                let frame = EvalFrame {
                    pred: pred.pose3d(i, tree).map_err(|e| CliError::core(format!("{} {}", args.pred.display(), context()), e))?,
                    gt: gt.pose3d(i, tree).map_err(|e| CliError::core(format!("{} {}", args.gt.display(), context()), e))?,
                    labels: FrameLabels {
                        frame_index: rec.frame,
                        activity: rec.labels.activity.clone(),
                        scene: rec.labels.scene.clone(),
                        subject: rec.labels.subject.clone(),
                        class: classes.as_ref().and_then(|c| c.get(&rec.frame).cloned()),
                    },
                };
                let scored = frame_eval(&frame, &config).map_err(|e| CliError::core(context(), e))?;
                acc.add(&scored).map_err(|e| CliError::core(context(), e))?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = empty;
    for acc in chunks {
        total.merge(&acc?).map_err(|e| CliError::core("evaluate", e))?;
    }
    let report = total.finish(args.stride).map_err(|e| CliError::core("evaluate", e))?;

    let dir = ctx.out_dir()?;
    save(&dir.join("report.json"), &report_json(&report, args.align.as_str()))?;
    save(&dir.join("report.csv"), &report_csv(&report))?;
    let t = &report.total;
    println!(
        "evaluate: {} frames, MPJPE {:.2} mm, PCK@{} {:.4}, AUC {:.4}",
        t.frames, t.mpjpe, report.threshold, t.pck, t.auc
    );
    Ok(())
}
