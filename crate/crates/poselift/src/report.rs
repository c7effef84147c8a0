//! Evaluation reports as JSON and CSV.
//!
//! The CSV has a fixed column order,
//! `bucket_type,bucket_name,frames,mpjpe_mm,pck150,auc`, with the overall
//! result first (`total,all`) followed by one row per bucket. The `pck150`
//! column holds PCK at the configured threshold, which is 150 mm unless
//! overridden; the JSON form records the threshold explicitly.

use poselift_core::metrics::{EvalReport, MetricSummary};
use serde::Serialize;

use crate::write::to_json_bytes;

pub const CSV_COLUMNS: [&str; 6] = ["bucket_type", "bucket_name", "frames", "mpjpe_mm", "pck150", "auc"];

#[derive(Debug, Serialize)]
struct JsonSummary {
    frames: usize,
    joints: usize,
    mpjpe_mm: f64,
    pck: f64,
    auc: f64,
}

impl From<&MetricSummary> for JsonSummary {
    fn from(s: &MetricSummary) -> Self {
        Self {
            frames: s.frames,
            joints: s.joints,
            mpjpe_mm: s.mpjpe,
            pck: s.pck,
            auc: s.auc,
        }
    }
}

#[derive(Debug, Serialize)]
struct JsonBucket<'a> {
    bucket_type: &'static str,
    bucket_name: &'a str,
    #[serde(flatten)]
    summary: JsonSummary,
}

#[derive(Debug, Serialize)]
struct JsonAucRange {
    min: f64,
    max: f64,
    step: f64,
}

#[derive(Debug, Serialize)]
struct JsonReport<'a> {
    threshold_mm: f64,
    auc_range_mm: JsonAucRange,
    stride: usize,
    alignment: &'a str,
    total: JsonSummary,
    buckets: Vec<JsonBucket<'a>>,
}

/// `alignment` is recorded verbatim (`none`, `t`, `st` or `rst`).
pub fn report_json(report: &EvalReport, alignment: &str) -> Vec<u8> {
    to_json_bytes(&JsonReport {
        threshold_mm: report.threshold,
        auc_range_mm: JsonAucRange {
            min: report.auc_range.min(),
            max: report.auc_range.max(),
            step: report.auc_range.step(),
        },
        stride: report.stride,
        alignment,
        total: (&report.total).into(),
        buckets: report
            .buckets
            .iter()
            .map(|b| JsonBucket {
                bucket_type: b.kind.as_str(),
                bucket_name: &b.name,
                summary: (&b.summary).into(),
            })
            .collect(),
    })
}

pub fn report_csv(report: &EvalReport) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("writing to memory");
    let row = |kind: &str, name: &str, s: &MetricSummary| {
        [
            kind.to_owned(),
            name.to_owned(),
            s.frames.to_string(),
            s.mpjpe.to_string(),
            s.pck.to_string(),
            s.auc.to_string(),
        ]
    };
    w.write_record(row("total", "all", &report.total)).expect("writing to memory");
    for b in &report.buckets {
        w.write_record(row(b.kind.as_str(), &b.name, &b.summary)).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}
