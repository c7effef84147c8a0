//! The `poselift` command line.
//!
//! Exit codes: 0 on success, 1 when an input is missing or invalid, 2 when
//! processing fails on valid input (for example every frame failing to
//! lift, or an output that cannot be written).

mod analysis;
mod augment;
mod evaluate;
mod lift;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poselift_core::{KinematicTree, SkeletonDef};

use crate::calib::Calibration;
use crate::skeleton_file::{bundled_h36m17, load_skeleton};
use crate::{write_atomic, IoError};

#[derive(Debug, Parser)]
#[command(name = "poselift", version, about = "Monocular 3D pose lifting, evaluation and augmentation tools")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SharedArgs {
    /// Skeleton definition (JSON). Defaults to the bundled 17-joint `h36m17`.
    #[arg(long, global = true, value_name = "FILE")]
    pub skeleton: Option<PathBuf>,
    /// Camera calibration (JSON object keyed by camera id).
    #[arg(long, global = true, value_name = "FILE")]
    pub calib: Option<PathBuf>,
    /// Seed for every random choice (k-means seeding, plans, texture offsets).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-frame work; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output file, or output directory for `evaluate` and `augment run`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project camera-space 3D poses to 2D keypoints.
    Project(lift::ProjectArgs),
    /// Place root-relative 3D poses in camera space using 2D keypoints.
    Lift(lift::LiftArgs),
    /// Score predictions against ground truth (MPJPE, PCK, AUC).
    Evaluate(evaluate::EvaluateArgs),
    /// Group poses with k-means.
    Cluster(analysis::ClusterArgs),
    /// Fit or apply a linear joint map between skeletons.
    #[command(subcommand)]
    Retarget(analysis::RetargetCommand),
    /// Plan or run appearance augmentation.
    #[command(subcommand)]
    Augment(augment::AugmentCommand),
    /// Fit or apply per-joint fusion of direct and parent-relative estimates.
    #[command(subcommand)]
    Fuse(analysis::FuseCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Input,
    Runtime,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Input,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Runtime,
            message: message.into(),
        }
    }

    /// Classifies a core error: bad data is an input error, numerical
    /// failure on valid data is a runtime error.
    pub fn core(context: impl fmt::Display, e: poselift_core::Error) -> Self {
        use poselift_core::Error as E;
        let message = format!("{context}: {e}");
        match e {
            E::DegenerateSpread(_)
            | E::NonPositiveDepth
            | E::DegenerateConfiguration
            | E::RankDeficient
            | E::InsufficientSamples { .. }
            | E::InsufficientFrames { .. }
            | E::TooFewPoses { .. }
            | E::EmptyAfterSampling(_) => Self::runtime(message),
            _ => Self::input(message),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            FailureKind::Input => 1,
            FailureKind::Runtime => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::input(e.to_string())
    }
}

/// Shared state resolved from the global flags.
pub(crate) struct Context {
    pub def: SkeletonDef,
    pub tree: KinematicTree,
    calib_path: Option<PathBuf>,
    pub seed: u64,
    out: Option<PathBuf>,
}

impl Context {
    fn new(shared: &SharedArgs) -> Result<Self, CliError> {
        let (def, tree) = match &shared.skeleton {
            Some(p) => load_skeleton(p)?,
            None => bundled_h36m17(),
        };
        Ok(Self {
            def,
            tree,
            calib_path: shared.calib.clone(),
            seed: shared.seed,
            out: shared.out.clone(),
        })
    }

    pub fn calibration(&self) -> Result<Calibration, CliError> {
        let path = self.calib_path.as_ref().ok_or_else(|| CliError::input("--calib is required"))?;
        Ok(Calibration::load(path)?)
    }

    pub fn out(&self) -> Result<&Path, CliError> {
        self.out.as_deref().ok_or_else(|| CliError::input("--out is required"))
    }

    /// `--out` as a directory, created if needed.
    pub fn out_dir(&self) -> Result<&Path, CliError> {
        let dir = self.out()?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

/// Writes an output file; failures here are runtime errors.
pub(crate) fn save(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| CliError::runtime(e.to_string()))
}

pub(crate) fn save_with<F>(f: F) -> Result<(), CliError>
where
    F: FnOnce() -> Result<(), IoError>,
{
    f().map_err(|e| CliError::runtime(e.to_string()))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context::new(&cli.shared)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.shared.threads)
        .build()
        .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Project(a) => lift::project(&ctx, a),
        Command::Lift(a) => lift::lift(&ctx, a),
        Command::Evaluate(a) => evaluate::evaluate(&ctx, a),
        Command::Cluster(a) => analysis::cluster(&ctx, a),
        Command::Retarget(c) => analysis::retarget(&ctx, c),
        Command::Augment(c) => augment::augment(&ctx, c),
        Command::Fuse(c) => analysis::fuse(&ctx, c),
    })
}

/// Parses `args`, runs, and reports errors on stderr. Used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Splits `min:max:step`.
pub(crate) fn parse_range(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected min:max:step, got `{s}`"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    Ok((num(a)?, num(b)?, num(c)?))
}
