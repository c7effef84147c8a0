use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use log::info;
use poselift_core::augment::{composite, plan_augmentation, AugmentAssets, AugmentTier, CompositeOptions, TierProportions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{save, CliError, Context};
use crate::artifacts::PlanFile;
use crate::manifest::{read_rgb, resize_rgb, write_rgb, Manifest};
use crate::write::to_json_bytes;

#[derive(Debug, Subcommand)]
pub enum AugmentCommand {
    /// Assign each frame an augmentation tier.
    Plan(PlanArgs),
    /// Composite every frame according to a plan; `--out` is a directory.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Manifest whose frame ids are planned.
    #[arg(long, value_name = "FILE", required_unless_present = "frames")]
    pub manifest: Option<PathBuf>,
    /// Plan frame ids 0..N instead of reading a manifest.
    #[arg(long, conflicts_with = "manifest")]
    pub frames: Option<u64>,
    /// Fractions for the tiers none, bg_chair, full.
    #[arg(long, default_value = "0.25,0.40,0.35", value_name = "NONE,BG_CHAIR,FULL")]
    pub proportions: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub plan: PathBuf,
    /// Multiplier on the shading surrogate, clamped to 1 after scaling.
    #[arg(long, default_value_t = 1.0)]
    pub gain: f64,
    /// Tile textures from the origin instead of a seeded offset.
    #[arg(long)]
    pub fixed_offsets: bool,
}

pub(super) fn augment(ctx: &Context, command: AugmentCommand) -> Result<(), CliError> {
    match command {
        AugmentCommand::Plan(a) => plan(ctx, a),
        AugmentCommand::Run(a) => run(ctx, a),
    }
}

fn parse_proportions(s: &str) -> Result<TierProportions, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::input(format!("--proportions: {e}")))?;
    let [none, bg, full] = v.as_slice() else {
        return Err(CliError::input("--proportions needs three comma-separated values"));
    };
    TierProportions::new(*none, *bg, *full).map_err(|e| CliError::core("--proportions", e))
}

fn plan(ctx: &Context, args: PlanArgs) -> Result<(), CliError> {
    let proportions = parse_proportions(&args.proportions)?;
    let ids = match (&args.manifest, args.frames) {
        (Some(m), _) => Manifest::load(m)?.frame_ids(),
        (None, Some(n)) => (0..n).collect(),
        (None, None) => return Err(CliError::input("--manifest or --frames is required")),
    };
    let out = ctx.out()?;
    let plan = plan_augmentation(&ids, proportions, ctx.seed);
    save(out, &PlanFile::new(&plan).to_json())?;
    let [none, bg, full] = plan.counts();
    println!("augment plan: {} frames, none {none}, bg_chair {bg}, full {full}", ids.len());
    Ok(())
}

/// Independent stream per frame, so output does not depend on scheduling.
fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    id: u64,
    tier: &'static str,
    output: String,
    /// Asset path per region, in background, chair, upper, lower order.
    assets: [Option<String>; 4],
    composite_seed: u64,
}

fn run(ctx: &Context, args: RunArgs) -> Result<(), CliError> {
    let manifest = Manifest::load(&args.manifest)?;
    let plan = PlanFile::load(&args.plan)?;
    let tiers: BTreeMap<u64, AugmentTier> = plan.assignments.iter().copied().collect();
    if let Some(f) = manifest.frames.iter().find(|f| !tiers.contains_key(&f.id)) {
        return Err(CliError::input(format!("{}: frame {} is not in the plan", args.plan.display(), f.id)));
    }
    if !(args.gain.is_finite() && args.gain >= 0.0) {
        return Err(CliError::input("--gain must be finite and >= 0"));
    }
    let dir = ctx.out_dir()?;
    let pools = manifest.assets.pools();

    let results: Vec<Result<OutputEntry, CliError>> = manifest
        .frames
        .par_iter()
        .map(|frame| {
            let tier = tiers[&frame.id];
            let mut rng = frame_rng(ctx.seed, frame.id);
            // one draw per pool regardless of tier keeps the stream stable
            let picks: Vec<Option<&PathBuf>> = pools
                .iter()
                .map(|pool| {
                    let i: u32 = rng.random();
                    (!pool.is_empty()).then(|| &pool[i as usize % pool.len()])
                })
                .collect();
            let composite_seed: u64 = rng.random();
            let image = read_rgb(&manifest.resolve(&frame.image))?;
            let (w, h) = image.dims();
            let masks = manifest.load_masks(frame, w, h)?;
            let load = |p: Option<&PathBuf>| p.map(|p| read_rgb(&manifest.resolve(p))).transpose();
            let assets = AugmentAssets {
                background: load(picks[0])?.map(|bg| resize_rgb(&bg, w, h)),
                chair: load(picks[1])?,
                upper_body: load(picks[2])?,
                lower_body: load(picks[3])?,
            }
            .for_tier(tier);
            let mut options = CompositeOptions::new(composite_seed);
            options.randomize_offsets = !args.fixed_offsets;
            options.gain = args.gain;
            let out = composite(&image, &masks, &assets, &options).map_err(|e| CliError::core(format!("frame {}", frame.id), e))?;
            let name = format!("{:06}.png", frame.id);
            write_rgb(&dir.join(&name), &out).map_err(|e| CliError::runtime(e.to_string()))?;
            let used = [
                assets.background.is_some(),
                assets.chair.is_some(),
                assets.upper_body.is_some(),
                assets.lower_body.is_some(),
            ];
            Ok(OutputEntry {
                id: frame.id,
                tier: tier.as_str(),
                output: name,
                assets: std::array::from_fn(|r| picks[r].filter(|_| used[r]).map(|p| p.display().to_string())),
                composite_seed,
            })
        })
        .collect();
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    save(&dir.join("augmented.json"), &to_json_bytes(&entries))?;
    info!("wrote {} frames to {}", entries.len(), dir.display());
    let count = |t: AugmentTier| entries.iter().filter(|e| e.tier == t.as_str()).count();
    println!(
        "augment run: {} frames, none {}, bg_chair {}, full {}",
        entries.len(),
        count(AugmentTier::None),
        count(AugmentTier::BackgroundChair),
        count(AugmentTier::Full)
    );
    Ok(())
}
