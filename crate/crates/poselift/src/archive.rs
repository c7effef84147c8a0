//! Pose archives: one record per frame, stored as CSV or JSON.
//!
//! CSV layout, `#` lines first, then a header row and one row per frame:
//!
//! ```text
//! # poselift-archive: 1
//! # skeleton: h36m17 3f0c7a1d9e2b4c55
//! # joints: 17
//! # kind: root_relative
//! # units: mm
//! # camera: cam0
//! frame,j0_x,j0_y,j0_z,...,j16_z,activity,scene,subject
//! 0,12.5,-803.25,40,...,walk,studio,S1
//! ```
//!
//! Keypoint archives drop the `_z` columns. The label columns are optional
//! and appear only when at least one record carries that label; an empty
//! cell means "no label". Values are written as shortest round-trip
//! decimals, so a write/read cycle reproduces every bit.

use std::path::Path;

use poselift_core::representations::RelPose;
use poselift_core::skeleton::RelOrder;
use poselift_core::{Frame, KinematicTree, Pose2D, Pose3D, SkeletonDef, Vector3};
use serde::{Deserialize, Serialize};

use crate::write::{read_text, to_json_bytes, write_atomic};
use crate::{IoError, Location};

const FORMAT_VERSION: &str = "1";
const LABELS: [&str; 3] = ["activity", "scene", "subject"];

/// What the values of an archive mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseKind {
    /// 3D joints relative to the root, millimeters.
    RootRelative,
    /// 3D joints in camera coordinates, millimeters.
    CameraGlobal,
    /// 2D keypoints, pixels.
    Keypoints,
    /// Offsets from each joint's parent, millimeters.
    ParentRelative1,
    /// Offsets from each joint's grandparent, millimeters.
    ParentRelative2,
}

impl PoseKind {
    pub const ALL: [PoseKind; 5] = [
        PoseKind::RootRelative,
        PoseKind::CameraGlobal,
        PoseKind::Keypoints,
        PoseKind::ParentRelative1,
        PoseKind::ParentRelative2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PoseKind::RootRelative => "root_relative",
            PoseKind::CameraGlobal => "camera_global",
            PoseKind::Keypoints => "keypoints",
            PoseKind::ParentRelative1 => "parent_relative_1",
            PoseKind::ParentRelative2 => "parent_relative_2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Coordinates per joint.
    pub fn dims(self) -> usize {
        if self == PoseKind::Keypoints {
            2
        } else {
            3
        }
    }

    pub fn units(self) -> &'static str {
        if self == PoseKind::Keypoints {
            "px"
        } else {
            "mm"
        }
    }

    pub fn from_frame(frame: Frame) -> Self {
        match frame {
            Frame::RootRelative => PoseKind::RootRelative,
            Frame::CameraGlobal => PoseKind::CameraGlobal,
        }
    }

    pub fn from_order(order: RelOrder) -> Self {
        match order {
            RelOrder::First => PoseKind::ParentRelative1,
            RelOrder::Second => PoseKind::ParentRelative2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveHeader {
    /// Skeleton name, informational.
    pub skeleton: String,
    /// Hex skeleton id, checked against the loaded skeleton.
    pub skeleton_id: String,
    pub joints: usize,
    pub kind: PoseKind,
    pub camera: Option<String>,
}

impl ArchiveHeader {
    pub fn new(def: &SkeletonDef, tree: &KinematicTree, kind: PoseKind) -> Self {
        Self {
            skeleton: def.name.clone(),
            skeleton_id: tree.id().to_string(),
            joints: tree.len(),
            kind,
            camera: None,
        }
    }

    pub fn with_camera(mut self, camera: impl Into<String>) -> Self {
        self.camera = Some(camera.into());
        self
    }

    /// Values per record.
    pub fn width(&self) -> usize {
        self.joints * self.kind.dims()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLabels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

impl RecordLabels {
    fn get(&self, i: usize) -> Option<&String> {
        [&self.activity, &self.scene, &self.subject][i].as_ref()
    }

    fn slot(&mut self, i: usize) -> &mut Option<String> {
        match i {
            0 => &mut self.activity,
            1 => &mut self.scene,
            _ => &mut self.subject,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub frame: u64,
    pub values: Vec<f64>,
    pub labels: RecordLabels,
}

/// Problems with a record, independent of where it came from.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("expected {expected} values, got {actual}")]
    Width { expected: usize, actual: usize },
    #[error("frame index {frame} does not increase past {previous}")]
    NotIncreasing { frame: u64, previous: u64 },
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("empty label; omit the label instead")]
    EmptyLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseArchive {
    pub header: ArchiveHeader,
    records: Vec<PoseRecord>,
}

impl PoseArchive {
    pub fn new(header: ArchiveHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[PoseRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn frames(&self) -> impl Iterator<Item = u64> + '_ {
        self.records.iter().map(|r| r.frame)
    }

    /// Appends a record, enforcing width, finiteness and increasing frames.
    pub fn push(&mut self, record: PoseRecord) -> Result<(), RecordError> {
        let expected = self.header.width();
        if record.values.len() != expected {
            return Err(RecordError::Width {
                expected,
                actual: record.values.len(),
            });
        }
        if let Some(i) = record.values.iter().position(|v| !v.is_finite()) {
            return Err(RecordError::NonFinite(i));
        }
        if let Some(last) = self.records.last() {
            if record.frame <= last.frame {
                return Err(RecordError::NotIncreasing {
                    frame: record.frame,
                    previous: last.frame,
                });
            }
        }
        if (0..3).any(|i| record.labels.get(i).is_some_and(|s| s.is_empty())) {
            return Err(RecordError::EmptyLabel);
        }
        self.records.push(record);
        Ok(())
    }

    pub fn push_pose3d(&mut self, frame: u64, pose: &Pose3D, labels: RecordLabels) -> Result<(), RecordError> {
        self.push(PoseRecord {
            frame,
            values: pose.to_flat(),
            labels,
        })
    }

    pub fn push_pose2d(&mut self, frame: u64, pose: &Pose2D, labels: RecordLabels) -> Result<(), RecordError> {
        self.push(PoseRecord {
            frame,
            values: pose.to_flat(),
            labels,
        })
    }

    pub fn push_rel(&mut self, frame: u64, rel: &RelPose, labels: RecordLabels) -> Result<(), RecordError> {
        self.push(PoseRecord {
            frame,
            values: rel.deltas().iter().flat_map(|d| [d.x, d.y, d.z]).collect(),
            labels,
        })
    }

    /// Position of `frame` among the records.
    pub fn find(&self, frame: u64) -> Option<usize> {
        self.records.binary_search_by_key(&frame, |r| r.frame).ok()
    }

    /// Fails with [`IoError::SkeletonMismatch`] unless the header names `tree`.
    pub fn check_skeleton(&self, tree: &KinematicTree, path: &Path) -> Result<(), IoError> {
        let expected = tree.id().to_string();
        if self.header.skeleton_id != expected || self.header.joints != tree.len() {
            return Err(IoError::SkeletonMismatch {
                path: path.to_owned(),
                expected,
                found: format!("{} {} ({} joints)", self.header.skeleton, self.header.skeleton_id, self.header.joints),
            });
        }
        Ok(())
    }

    pub fn pose3d(&self, index: usize, tree: &KinematicTree) -> poselift_core::Result<Pose3D> {
        let frame = match self.header.kind {
            PoseKind::RootRelative => Frame::RootRelative,
            PoseKind::CameraGlobal => Frame::CameraGlobal,
            _ => return Err(poselift_core::Error::WrongFrame),
        };
        Pose3D::from_flat(&self.records[index].values, frame, tree)
    }

    pub fn pose2d(&self, index: usize, tree: &KinematicTree) -> poselift_core::Result<Pose2D> {
        if self.header.kind != PoseKind::Keypoints {
            return Err(poselift_core::Error::WrongFrame);
        }
        Pose2D::from_flat(&self.records[index].values, tree)
    }

    pub fn rel_pose(&self, index: usize, tree: &KinematicTree) -> poselift_core::Result<RelPose> {
        let order = match self.header.kind {
            PoseKind::ParentRelative1 => RelOrder::First,
            PoseKind::ParentRelative2 => RelOrder::Second,
            _ => return Err(poselift_core::Error::WrongFrame),
        };
        let deltas = self.records[index]
            .values
            .chunks_exact(3)
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        RelPose::new(deltas, order, tree)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveFormat {
    Csv,
    Json,
}

impl ArchiveFormat {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ArchiveFormat::Json,
            _ => ArchiveFormat::Csv,
        }
    }
}

pub fn read_pose_archive(path: &Path) -> Result<PoseArchive, IoError> {
    let text = read_text(path)?;
    match ArchiveFormat::from_path(path) {
        ArchiveFormat::Csv => parse_csv(&text, path),
        ArchiveFormat::Json => parse_json(&text, path),
    }
}

/// Reads an archive and checks that it was written for `tree`.
pub fn read_pose_archive_for(path: &Path, tree: &KinematicTree) -> Result<PoseArchive, IoError> {
    let archive = read_pose_archive(path)?;
    archive.check_skeleton(tree, path)?;
    Ok(archive)
}

pub fn write_pose_archive(archive: &PoseArchive, path: &Path) -> Result<(), IoError> {
    let bytes = match ArchiveFormat::from_path(path) {
        ArchiveFormat::Csv => to_csv(archive),
        ArchiveFormat::Json => to_json_bytes(&JsonArchive::from(archive)),
    };
    write_atomic(path, &bytes)
}

fn column_names(header: &ArchiveHeader) -> Vec<String> {
    let axes: &[&str] = if header.kind.dims() == 2 { &["x", "y"] } else { &["x", "y", "z"] };
    let mut cols = vec!["frame".to_owned()];
    for j in 0..header.joints {
        for a in axes {
            cols.push(format!("j{j}_{a}"));
        }
    }
    cols
}

pub fn to_csv(archive: &PoseArchive) -> Vec<u8> {
    let h = &archive.header;
    let mut out = String::new();
    out.push_str(&format!("# poselift-archive: {FORMAT_VERSION}\n"));
    out.push_str(&format!("# skeleton: {} {}\n", h.skeleton, h.skeleton_id));
    out.push_str(&format!("# joints: {}\n", h.joints));
    out.push_str(&format!("# kind: {}\n", h.kind.as_str()));
    out.push_str(&format!("# units: {}\n", h.kind.units()));
    if let Some(c) = &h.camera {
        out.push_str(&format!("# camera: {c}\n"));
    }
    let used: Vec<usize> = (0..3)
        .filter(|&i| archive.records.iter().any(|r| r.labels.get(i).is_some()))
        .collect();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out.into_bytes());
    let mut cols = column_names(h);
    cols.extend(used.iter().map(|&i| LABELS[i].to_owned()));
    w.write_record(&cols).expect("writing to memory");
    let mut row = Vec::with_capacity(cols.len());
    for r in &archive.records {
        row.clear();
        row.push(r.frame.to_string());
        row.extend(r.values.iter().map(|v| v.to_string()));
        row.extend(used.iter().map(|&i| r.labels.get(i).cloned().unwrap_or_default()));
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

fn parse_header_lines(text: &str, path: &Path) -> Result<(ArchiveHeader, usize, usize), IoError> {
    let (mut version, mut skeleton, mut joints, mut kind, mut units, mut camera) = (None, None, None, None, None, None);
    let mut offset = 0;
    let mut lines = 0;
    for line in text.split_inclusive('\n') {
        let Some(meta) = line.strip_prefix('#') else { break };
        lines += 1;
        offset += line.len();
        let at = Location::line(lines as u64);
        let meta = meta.trim();
        if meta.is_empty() {
            continue;
        }
        let (key, value) = meta
            .split_once(':')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| IoError::parse(path, at.clone(), "expected `# key: value`"))?;
        let at = at.with_field(key);
        match key {
            "poselift-archive" => version = Some(value.to_owned()),
            "skeleton" => {
                let (name, id) = value
                    .rsplit_once(' ')
                    .ok_or_else(|| IoError::parse(path, at, "expected `<name> <id>`"))?;
                skeleton = Some((name.trim().to_owned(), id.to_owned()));
            }
            "joints" => {
                joints = Some(
                    value
                        .parse::<usize>()
                        .map_err(|e| IoError::parse(path, at, e.to_string()))?,
                )
            }
            "kind" => {
                kind = Some(PoseKind::parse(value).ok_or_else(|| IoError::parse(path, at, format!("unknown kind `{value}`")))?)
            }
            "units" => units = Some((value.to_owned(), lines)),
            "camera" => camera = Some(value.to_owned()),
            _ => return Err(IoError::parse(path, at, format!("unknown metadata key `{key}`"))),
        }
    }
    let missing = |what: &str| IoError::parse(path, Location::field(what), format!("missing `# {what}:` line"));
    match version {
        Some(v) if v == FORMAT_VERSION => {}
        Some(v) => return Err(IoError::parse(path, Location::field("poselift-archive"), format!("unsupported version `{v}`"))),
        None => return Err(missing("poselift-archive")),
    }
    let (skeleton, skeleton_id) = skeleton.ok_or_else(|| missing("skeleton"))?;
    let kind = kind.ok_or_else(|| missing("kind"))?;
    let (units, units_line) = units.ok_or_else(|| missing("units"))?;
    if units != kind.units() {
        return Err(IoError::parse(
            path,
            Location::line(units_line as u64).with_field("units"),
            format!("`{}` archives are in {}, not {units}", kind.as_str(), kind.units()),
        ));
    }
    let header = ArchiveHeader {
        skeleton,
        skeleton_id,
        joints: joints.ok_or_else(|| missing("joints"))?,
        kind,
        camera,
    };
    Ok((header, offset, lines))
}

pub fn parse_csv(text: &str, path: &Path) -> Result<PoseArchive, IoError> {
    if text.trim().is_empty() {
        return Err(IoError::parse(path, Location::default(), "empty file"));
    }
    let (header, offset, meta_lines) = parse_header_lines(text, path)?;
    let line_of = |pos: Option<&csv::Position>| pos.map(|p| p.line() + meta_lines as u64);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text[offset..].as_bytes());
    let header_row = reader
        .headers()
        .map_err(|e| IoError::parse(path, Location::line(meta_lines as u64 + 1), e.to_string()))?
        .clone();
    let header_line = meta_lines as u64 + 1;
    let expected = column_names(&header);
    let mut label_cols = Vec::new();
    for (i, name) in header_row.iter().enumerate() {
        let at = Location::line(header_line).with_field(name);
        if i < expected.len() {
            if name != expected[i] {
                return Err(IoError::parse(path, at, format!("expected column `{}`", expected[i])));
            }
        } else {
            let Some(slot) = LABELS.iter().position(|l| *l == name) else {
                return Err(IoError::parse(path, at, "unknown column"));
            };
            if label_cols.last().is_some_and(|&last| last >= slot) {
                return Err(IoError::parse(path, at, "label columns must be unique and ordered activity, scene, subject"));
            }
            label_cols.push(slot);
        }
    }
    if header_row.len() < expected.len() {
        return Err(IoError::parse(
            path,
            Location::line(header_line).with_field(&expected[header_row.len()]),
            format!("header has {} columns, expected at least {}", header_row.len(), expected.len()),
        ));
    }
    let width = header.width();
    let mut archive = PoseArchive::new(header);
    for row in reader.records() {
        let row = row.map_err(|e| IoError::parse(path, Location { line: line_of(e.position()), ..Location::default() }, e.to_string()))?;
        let at = Location {
            line: line_of(row.position()),
            ..Location::default()
        };
        let frame: u64 = row
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e| IoError::parse(path, at.clone().with_field("frame"), format!("bad frame index: {e}")))?;
        let at = at.with_frame(frame);
        if row.len() != expected.len() + label_cols.len() {
            let joints = (row.len().saturating_sub(1 + label_cols.len())) as f64 / archive.header.kind.dims() as f64;
            return Err(IoError::parse(
                path,
                at,
                format!(
                    "row has {} columns, expected {} ({} joints; row holds {joints} joints)",
                    row.len(),
                    expected.len() + label_cols.len(),
                    archive.header.joints
                ),
            ));
        }
        let mut values = Vec::with_capacity(width);
        for c in 1..=width {
            let cell = row[c].trim();
            let v: f64 = cell
                .parse()
                .map_err(|_| IoError::parse(path, at.clone().with_field(&expected[c]), format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(IoError::parse(path, at.clone().with_field(&expected[c]), format!("non-finite value `{cell}`")));
            }
            values.push(v);
        }
        let mut labels = RecordLabels::default();
        for (k, &slot) in label_cols.iter().enumerate() {
            let cell = &row[width + 1 + k];
            if !cell.is_empty() {
                *labels.slot(slot) = Some(cell.to_owned());
            }
        }
        archive
            .push(PoseRecord { frame, values, labels })
            .map_err(|e| IoError::parse(path, at, e.to_string()))?;
    }
    Ok(archive)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    frame: u64,
    values: Vec<f64>,
    #[serde(flatten)]
    labels: RecordLabels,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonArchive {
    format: String,
    skeleton: String,
    skeleton_id: String,
    joints: usize,
    kind: PoseKind,
    units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera: Option<String>,
    records: Vec<JsonRecord>,
}

impl From<&PoseArchive> for JsonArchive {
    fn from(a: &PoseArchive) -> Self {
        let h = &a.header;
        JsonArchive {
            format: format!("poselift-archive/{FORMAT_VERSION}"),
            skeleton: h.skeleton.clone(),
            skeleton_id: h.skeleton_id.clone(),
            joints: h.joints,
            kind: h.kind,
            units: h.kind.units().to_owned(),
            camera: h.camera.clone(),
            records: a
                .records
                .iter()
                .map(|r| JsonRecord {
                    frame: r.frame,
                    values: r.values.clone(),
                    labels: r.labels.clone(),
                })
                .collect(),
        }
    }
}

pub fn parse_json(text: &str, path: &Path) -> Result<PoseArchive, IoError> {
    // `deny_unknown_fields` does not combine with `flatten`, so record keys
    // are checked by hand.
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| IoError::json(path, &e))?;
    if let Some(records) = value.get("records").and_then(|r| r.as_array()) {
        for (i, r) in records.iter().enumerate() {
            if let Some(obj) = r.as_object() {
                if let Some(k) = obj.keys().find(|k| !["frame", "values"].contains(&k.as_str()) && !LABELS.contains(&k.as_str())) {
                    return Err(IoError::parse(path, Location::field(format!("records[{i}].{k}")), "unknown field"));
                }
            }
        }
    }
    let raw: JsonArchive = serde_json::from_value(value).map_err(|e| IoError::parse(path, Location::default(), e.to_string()))?;
    let expected_format = format!("poselift-archive/{FORMAT_VERSION}");
    if raw.format != expected_format {
        return Err(IoError::parse(path, Location::field("format"), format!("expected `{expected_format}`")));
    }
    if raw.units != raw.kind.units() {
        return Err(IoError::parse(path, Location::field("units"), format!("`{}` archives are in {}", raw.kind.as_str(), raw.kind.units())));
    }
    let mut archive = PoseArchive::new(ArchiveHeader {
        skeleton: raw.skeleton,
        skeleton_id: raw.skeleton_id,
        joints: raw.joints,
        kind: raw.kind,
        camera: raw.camera,
    });
    for (i, r) in raw.records.into_iter().enumerate() {
        let at = Location::field(format!("records[{i}]")).with_frame(r.frame);
        archive
            .push(PoseRecord {
                frame: r.frame,
                values: r.values,
                labels: r.labels,
            })
            .map_err(|e| IoError::parse(path, at, e.to_string()))?;
    }
    Ok(archive)
}
