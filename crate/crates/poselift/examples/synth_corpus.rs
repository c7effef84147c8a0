//! Regenerates `data/synthetic_corpus.csv`: 20 random body configurations,
//! each repeated 25 times with 15 mm joint jitter, frames shuffled.
//!
//! cargo run -p poselift --example synth_corpus -- crates/poselift/data/synthetic_corpus.csv

use std::path::PathBuf;

use poselift::archive::{write_pose_archive, ArchiveHeader, PoseArchive, PoseKind, RecordLabels};
use poselift::skeleton_file::bundled_h36m17;
use poselift_core::synth::PoseSampler;
use poselift_core::{Pose3D, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const PROTOTYPES: usize = 20;
const PER_PROTOTYPE: usize = 25;
const JITTER_MM: f64 = 15.0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| "synthetic_corpus.csv".into());
    let (def, tree) = bundled_h36m17();
    let sampler = PoseSampler::new(&def, &tree);
    let mut rng = ChaCha8Rng::seed_from_u64(20_170_601);
    let prototypes: Vec<Pose3D> = (0..PROTOTYPES).map(|_| sampler.sample(&mut rng, &tree)).collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..PROTOTYPES * PER_PROTOTYPE).map(|i| i % PROTOTYPES).collect();
    order.shuffle(&mut rng);

    let mut archive = PoseArchive::new(ArchiveHeader::new(&def, &tree, PoseKind::RootRelative));
    for (frame, &p) in order.iter().enumerate() {
        let joints = prototypes[p]
            .joints()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if j == tree.root() {
                    return Vector3::zeros();
                }
                let noisy = v + Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal) * JITTER_MM);
                // 0.1 mm resolution keeps the file small
                noisy.map(|c| (c * 10.0).round() / 10.0)
            })
            .collect();
        let pose = Pose3D::root_relative(joints, &tree)?;
        let labels = RecordLabels {
            activity: Some(format!("config_{p:02}")),
            ..RecordLabels::default()
        };
        archive.push_pose3d(frame as u64, &pose, labels)?;
    }
    write_pose_archive(&archive, &out)?;
    println!("wrote {} frames to {}", archive.len(), out.display());
    Ok(())
}
