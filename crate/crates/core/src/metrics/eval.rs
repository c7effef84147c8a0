//! Bucketed evaluation over a stream of frames.
//!
//! Every sampled frame contributes its per-joint errors to the overall
//! accumulator, to one bucket per label it carries (activity, scene,
//! subject, pose class) and to one bucket per joint group. Accumulators only
//! hold sums and integer counts, so merging is associative and commutative.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{align, is_correct, joint_errors, AlignMode, CurveCounter, ThresholdRange, DEFAULT_PCK_THRESHOLD};
use crate::pose::Pose3D;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameLabels {
    pub frame_index: u64,
    pub activity: Option<String>,
    pub scene: Option<String>,
    pub subject: Option<String>,
    /// Pose class, usually from K-means cluster grouping.
    pub class: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalFrame {
    pub pred: Pose3D,
    pub gt: Pose3D,
    pub labels: FrameLabels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Joints scored, e.g. the skeleton's evaluation subset.
    pub subset: Vec<usize>,
    pub threshold: f64,
    pub auc_range: ThresholdRange,
    /// Zero-based sampling stride over stream positions.
    pub stride: usize,
    pub alignment: Option<AlignMode>,
    /// Named joint groups reported separately (e.g. symmetry groups).
    pub joint_groups: Vec<(String, Vec<usize>)>,
}

impl EvalConfig {
    pub fn new(subset: Vec<usize>) -> Self {
        Self {
            subset,
            threshold: DEFAULT_PCK_THRESHOLD,
            auc_range: ThresholdRange::default(),
            stride: 1,
            alignment: None,
            joint_groups: Vec::new(),
        }
    }
}

/// Per-joint errors of one frame over the configured subset.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEval {
    pub per_joint_error: Vec<f64>,
    pub labels: FrameLabels,
}

pub fn frame_eval(frame: &EvalFrame, config: &EvalConfig) -> Result<FrameEval> {
    let errors = match config.alignment {
        Some(mode) => joint_errors(&align(&frame.pred, &frame.gt, mode)?, &frame.gt, &config.subset)?,
        None => joint_errors(&frame.pred, &frame.gt, &config.subset)?,
    };
    Ok(FrameEval {
        per_joint_error: errors,
        labels: frame.labels.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BucketKind {
    JointGroup,
    Activity,
    Scene,
    Subject,
    Class,
}

impl BucketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BucketKind::JointGroup => "joint_group",
            BucketKind::Activity => "activity",
            BucketKind::Scene => "scene",
            BucketKind::Subject => "subject",
            BucketKind::Class => "class",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "joint_group" => BucketKind::JointGroup,
            "activity" => BucketKind::Activity,
            "scene" => BucketKind::Scene,
            "subject" => BucketKind::Subject,
            "class" => BucketKind::Class,
            _ => return None,
        })
    }
}

impl fmt::Display for BucketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub frames: usize,
    pub joints: usize,
    pub mpjpe: f64,
    pub pck: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub kind: BucketKind,
    pub name: String,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub total: MetricSummary,
    pub threshold: f64,
    pub auc_range: ThresholdRange,
    pub stride: usize,
    /// Sorted by (kind, name).
    pub buckets: Vec<Bucket>,
}

impl EvalReport {
    pub fn buckets_of(&self, kind: BucketKind) -> impl Iterator<Item = &Bucket> {
        self.buckets.iter().filter(move |b| b.kind == kind)
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Sum {
    sum: f64,
    carry: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Acc {
    frames: usize,
    joints: usize,
    error: Sum,
    pck_hits: u64,
    curve: CurveCounter,
}

impl Acc {
    fn new(samples: usize) -> Self {
        Self {
            frames: 0,
            joints: 0,
            error: Sum::default(),
            pck_hits: 0,
            curve: CurveCounter::new(samples),
        }
    }

    fn add<'a>(&mut self, errors: impl Iterator<Item = &'a f64>, threshold: f64, grid: &[f64]) {
        self.frames += 1;
        for &e in errors {
            self.joints += 1;
            self.error.add(e);
            self.pck_hits += u64::from(is_correct(e, threshold));
            self.curve.add(grid, e);
        }
    }

    fn merge(&mut self, other: &Self) {
        self.frames += other.frames;
        self.joints += other.joints;
        self.error.add(other.error.sum);
        self.error.add(other.error.carry);
        self.pck_hits += other.pck_hits;
        self.curve.merge(&other.curve);
    }

    fn summary(&self) -> MetricSummary {
        let joints = self.joints.max(1) as f64;
        let hits = self.curve.hits();
        let auc = if hits.is_empty() {
            0.0
        } else {
            hits.iter().map(|&h| h as f64 / joints).sum::<f64>() / hits.len() as f64
        };
        MetricSummary {
            frames: self.frames,
            joints: self.joints,
            mpjpe: self.error.value() / joints,
            pck: self.pck_hits as f64 / joints,
            auc,
        }
    }
}

/// Which label kinds the stream carries; fixed by the first frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LabelShape([bool; 4]);

impl LabelShape {
    fn of(l: &FrameLabels) -> Self {
        Self([l.activity.is_some(), l.scene.is_some(), l.subject.is_some(), l.class.is_some()])
    }
}

/// Order-independent accumulator behind [`evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvalAccumulator {
    threshold: f64,
    range: ThresholdRange,
    grid: Vec<f64>,
    subset_len: usize,
    groups: Vec<(String, Vec<usize>)>,
    shape: Option<LabelShape>,
    total: Acc,
    by_label: BTreeMap<(BucketKind, String), Acc>,
    by_group: Vec<Acc>,
}

impl EvalAccumulator {
    pub fn new(config: &EvalConfig) -> Result<Self> {
        if !(config.threshold >= 0.0) {
            return Err(Error::BadRange("threshold must be >= 0"));
        }
        if config.stride == 0 {
            return Err(Error::BadRange("stride must be >= 1"));
        }
        if config.subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        // Groups are resolved to positions inside the scored subset.
        let groups = config
            .joint_groups
            .iter()
            .map(|(name, joints)| {
                joints
                    .iter()
                    .map(|j| {
                        config
                            .subset
                            .iter()
                            .position(|s| s == j)
                            .ok_or(Error::ShapeMismatch("joint group outside the scored subset"))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|pos| (name.clone(), pos))
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = config.auc_range.thresholds();
        let samples = grid.len();
        Ok(Self {
            threshold: config.threshold,
            range: config.auc_range,
            grid,
            subset_len: config.subset.len(),
            by_group: groups.iter().map(|_| Acc::new(samples)).collect(),
            groups,
            shape: None,
            total: Acc::new(samples),
            by_label: BTreeMap::new(),
        })
    }

    pub fn add(&mut self, frame: &FrameEval) -> Result<()> {
        let idx = frame.labels.frame_index as usize;
        if frame.per_joint_error.len() != self.subset_len {
            return Err(Error::ShapeMismatch("per-joint errors do not match the subset"));
        }
        let shape = LabelShape::of(&frame.labels);
        match self.shape {
            None => self.shape = Some(shape),
            Some(s) if s != shape => {
                return Err(Error::LabelMismatch {
                    frame: idx,
                    reason: "label fields differ from earlier frames",
                })
            }
            Some(_) => {}
        }
        let (t, grid) = (self.threshold, &self.grid);
        self.total.add(frame.per_joint_error.iter(), t, grid);
        let labels = [
            (BucketKind::Activity, &frame.labels.activity),
            (BucketKind::Scene, &frame.labels.scene),
            (BucketKind::Subject, &frame.labels.subject),
            (BucketKind::Class, &frame.labels.class),
        ];
        for (kind, label) in labels {
            if let Some(name) = label {
                self.by_label
                    .entry((kind, name.clone()))
                    .or_insert_with(|| Acc::new(grid.len()))
                    .add(frame.per_joint_error.iter(), t, grid);
            }
        }
        for ((_, positions), acc) in self.groups.iter().zip(&mut self.by_group) {
            acc.add(positions.iter().map(|&p| &frame.per_joint_error[p]), t, grid);
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.groups != other.groups || self.threshold != other.threshold {
            return Err(Error::ShapeMismatch("accumulators use different configurations"));
        }
        match (self.shape, other.shape) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::LabelMismatch {
                    frame: 0,
                    reason: "merged accumulators carry different label fields",
                })
            }
            (None, s) => self.shape = s,
            _ => {}
        }
        self.total.merge(&other.total);
        for (key, acc) in &other.by_label {
            self.by_label
                .entry(key.clone())
                .or_insert_with(|| Acc::new(self.grid.len()))
                .merge(acc);
        }
        for (a, b) in self.by_group.iter_mut().zip(&other.by_group) {
            a.merge(b);
        }
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.total.frames
    }

    pub fn finish(&self, stride: usize) -> Result<EvalReport> {
        if self.total.frames == 0 {
            return Err(Error::EmptyAfterSampling(stride));
        }
        let mut buckets: Vec<Bucket> = self
            .groups
            .iter()
            .zip(&self.by_group)
            .map(|((name, _), acc)| Bucket {
                kind: BucketKind::JointGroup,
                name: name.clone(),
                summary: acc.summary(),
            })
            .collect();
        buckets.extend(self.by_label.iter().map(|((kind, name), acc)| Bucket {
            kind: *kind,
            name: name.clone(),
            summary: acc.summary(),
        }));
        buckets.sort_by(|a, b| (a.kind, &a.name).cmp(&(b.kind, &b.name)));
        Ok(EvalReport {
            total: self.total.summary(),
            threshold: self.threshold,
            auc_range: self.range,
            stride,
            buckets,
        })
    }
}

/// Scores every `stride`-th frame (positions 0, stride, 2*stride, ...).
pub fn evaluate<I>(frames: I, config: &EvalConfig) -> Result<EvalReport>
where
    I: IntoIterator<Item = EvalFrame>,
{
    let mut acc = EvalAccumulator::new(config)?;
    for frame in frames.into_iter().step_by(config.stride) {
        acc.add(&frame_eval(&frame, config)?)?;
    }
    acc.finish(config.stride)
}
