#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poselift::archive::{write_pose_archive, ArchiveHeader, PoseArchive, PoseKind, RecordLabels};
use poselift::core::geometry::CameraIntrinsics;
use poselift::core::synth::PoseSampler;
use poselift::core::{KinematicTree, Pose2D, Pose3D, SkeletonDef};
use poselift::skeleton_file::bundled_h36m17;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn skeleton() -> (SkeletonDef, KinematicTree) {
    bundled_h36m17()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sampler() -> (SkeletonDef, KinematicTree, PoseSampler) {
    let (def, tree) = skeleton();
    let s = PoseSampler::new(&def, &tree);
    (def, tree, s)
}

/// Runs the binary with `args` and returns its output.
pub fn poselift<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_poselift"))
        .args(args)
        .env("POSELIFT_LOG", "off")
        .output()
        .expect("spawn poselift")
}

/// Like [`poselift`] but panics unless the run succeeds.
pub fn poselift_ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = poselift(args);
    assert!(
        out.status.success(),
        "poselift failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn path_arg(p: &Path) -> String {
    p.to_str().expect("utf-8 temp path").to_owned()
}

pub fn archive_3d(poses: &[Pose3D], kind: PoseKind, labels: impl Fn(usize) -> RecordLabels) -> PoseArchive {
    let (def, tree) = skeleton();
    let mut a = PoseArchive::new(ArchiveHeader::new(&def, &tree, kind));
    for (i, p) in poses.iter().enumerate() {
        a.push_pose3d(i as u64, p, labels(i)).unwrap();
    }
    a
}

pub fn write_3d(path: &Path, poses: &[Pose3D], kind: PoseKind) {
    write_pose_archive(&archive_3d(poses, kind, |_| RecordLabels::default()), path).unwrap();
}

pub fn write_2d(path: &Path, points: &[Pose2D], camera: &str) {
    let (def, tree) = skeleton();
    let mut a = PoseArchive::new(ArchiveHeader::new(&def, &tree, PoseKind::Keypoints).with_camera(camera));
    for (i, p) in points.iter().enumerate() {
        a.push_pose2d(i as u64, p, RecordLabels::default()).unwrap();
    }
    write_pose_archive(&a, path).unwrap();
}

pub fn write_calib(path: &Path, id: &str, cam: &CameraIntrinsics) {
    let pp = cam.principal_point();
    let (w, h) = cam.image_size();
    let text = format!(
        "{{\"{id}\": {{\"f\": {}, \"cx\": {}, \"cy\": {}, \"width\": {w}, \"height\": {h}}}}}\n",
        cam.focal(),
        pp.x,
        pp.y
    );
    std::fs::write(path, text).unwrap();
}

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_corpus.csv")
}
