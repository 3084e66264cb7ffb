//! Metric evaluation of a prediction directory against ground truth.
//!
//! Comparison runs at native ground-truth resolution; predictions at a
//! different size are resized bilinearly first, and the policy is stated
//! in the report header. Missing predictions are listed as skipped, and
//! the aggregate row mirrors the columns of benchmark tables.

use std::path::Path;

use campro::metrics::{aggregate, evaluate_pair, MetricMean, MetricReport, PerImageRecord};
use campro::raster::io::{load_gray, load_mask};
use campro::raster::resize_bilinear;

use super::run_pool;
use crate::config::{Protocol, RunConfig};
use crate::manifest::{DatasetManifest, PairedEntry};
use crate::table::{Cell, Table};

pub struct EvalOutput {
    pub report: MetricReport,
    pub table: Table,
    /// (stem, reason) for every pair not evaluated.
    pub skipped: Vec<(String, String)>,
}

impl EvalOutput {
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.skipped.is_empty())
    }
}

enum ItemResult {
    Record(Box<PerImageRecord>),
    Skipped { stem: String, reason: String },
}

fn process(entry: &PairedEntry, cfg: &RunConfig) -> ItemResult {
    let Some(pred_path) = &entry.pred else {
        return ItemResult::Skipped {
            stem: entry.stem.clone(),
            reason: "missing prediction".into(),
        };
    };
    let result = (|| -> anyhow::Result<PerImageRecord> {
        let gt = load_mask(&entry.gt)?;
        let mut pred_img = load_gray(pred_path)?;
        if pred_img.width() != gt.width() || pred_img.height() != gt.height() {
            pred_img = resize_bilinear(&pred_img, gt.width(), gt.height())?;
        }
        Ok(evaluate_pair(
            &entry.stem,
            &pred_img.to_float(),
            &gt,
            &cfg.metrics,
        )?)
    })();
    match result {
        Ok(record) => ItemResult::Record(Box::new(record)),
        Err(e) => ItemResult::Skipped {
            stem: entry.stem.clone(),
            reason: format!("{e:#}"),
        },
    }
}

fn mean_cell(m: &Option<MetricMean>) -> Cell {
    match m {
        Some(v) => Cell::Float(v.mean),
        None => Cell::Missing,
    }
}

fn value_cell(v: Option<f64>) -> Cell {
    match v {
        Some(v) => Cell::Float(v),
        None => Cell::Missing,
    }
}

fn build_table(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    report: &MetricReport,
    skipped: &[(String, String)],
) -> Table {
    let polyp = cfg.protocol == Protocol::Polyp;
    let mut columns = vec![
        "id".to_string(),
        "s_alpha".to_string(),
        "wfm".to_string(),
        "e_phi".to_string(),
        "mae".to_string(),
    ];
    if polyp {
        columns.push("dice".into());
        columns.push("iou".into());
    }

    let mut table = Table {
        meta: vec![],
        columns,
        rows: vec![],
    };
    table.push_meta("dataset", &manifest.name);
    table.push_meta(
        "protocol",
        match cfg.protocol {
            Protocol::Cod => "cod",
            Protocol::Polyp => "polyp",
        },
    );
    table.push_meta("metric_config", cfg.metrics.fingerprint());
    table.push_meta("seed", cfg.seed);
    table.push_meta(
        "resolution_policy",
        "native ground-truth resolution; predictions resized bilinearly when needed",
    );
    table.push_meta("images", report.count);
    table.push_meta("skipped_pairs", skipped.len());

    for rec in &report.per_image {
        let mut row = vec![
            Cell::Text(rec.id.clone()),
            value_cell(rec.s_alpha),
            value_cell(rec.wfm),
            value_cell(rec.e_phi),
            value_cell(rec.mae),
        ];
        if polyp {
            row.push(value_cell(rec.dice));
            row.push(value_cell(rec.iou));
        }
        table.rows.push(row);
    }
    let mut mean_row = vec![
        Cell::Text("mean".into()),
        mean_cell(&report.s_alpha),
        mean_cell(&report.wfm),
        mean_cell(&report.e_phi),
        mean_cell(&report.mae),
    ];
    if polyp {
        mean_row.push(mean_cell(&report.dice));
        mean_row.push(mean_cell(&report.iou));
    }
    table.rows.push(mean_row);
    table
}

/// Evaluate every prediction and emit the metric table.
pub fn cmd_eval(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> anyhow::Result<EvalOutput> {
    anyhow::ensure!(
        manifest.pred_dir.is_some(),
        "eval requires a prediction directory (--preds)"
    );
    let entries = manifest.scan()?;
    let results = run_pool(cfg.workers, &entries, |e| process(e, cfg));

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            ItemResult::Record(rec) => records.push(*rec),
            ItemResult::Skipped { stem, reason } => skipped.push((stem, reason)),
        }
    }
    let report = aggregate(records)?;
    let table = build_table(manifest, cfg, &report, &skipped);
    if let Some(path) = out {
        table.write(cfg.format, path)?;
    }
    Ok(EvalOutput {
        report,
        table,
        skipped,
    })
}
