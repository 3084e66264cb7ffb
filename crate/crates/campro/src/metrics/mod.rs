//! Segmentation evaluation metrics with per-image and aggregate reporting.
//!
//! The suite computes the structure measure, weighted F-measure, mean
//! enhanced-alignment measure, mean absolute error, and Dice/IoU. Every
//! internal constant lives in [`MetricConfig`] and is fingerprinted into
//! each record, so reports are reproducible down to the parameterization.
//!
//! Degenerate-input conventions follow the published reference codebases:
//!
//! - structure measure of an empty (full) ground truth is `1 − mean(pred)`
//!   (`mean(pred)`), and zero-area centroid quadrants contribute zero;
//! - enhanced alignment of a degenerate ground truth counts plain
//!   agreement with the binarized map, and per-level scores clip to
//!   [0,1] (the published `N−1` normalizer lets a perfect map exceed 1
//!   marginally on small frames);
//! - the weighted F-measure is undefined for an empty ground truth and is
//!   reported as skipped rather than zero-filled;
//! - Dice/IoU of two empty masks is 1.
//!
//! Two deliberate departures from the original MATLAB conventions are
//! documented here: the dependency blur uses replicated borders (the
//! original zero-pads, darkening objects that touch the frame), and
//! nearest-foreground ties resolve to the smallest row-major index.

mod e_measure;
mod mae;
mod overlap;
mod s_measure;
mod weighted_f;

pub use e_measure::e_measure_mean;
pub use mae::mae;
pub use overlap::dice_iou;
pub use s_measure::s_measure;
pub use weighted_f::weighted_fmeasure;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::raster::{BinaryMask, FloatMap};

pub(crate) const EPS: f64 = f64::EPSILON;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("shape mismatch: prediction {pred_w}x{pred_h} vs ground truth {gt_w}x{gt_h}")]
    ShapeMismatch {
        pred_w: usize,
        pred_h: usize,
        gt_w: usize,
        gt_h: usize,
    },
    #[error("undefined metric: {0}")]
    Undefined(&'static str),
    #[error("empty report: no record carries any metric value")]
    EmptyReport,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
}

pub(crate) fn check_shapes(pred: &FloatMap, gt: &BinaryMask) -> Result<(), MetricError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricError::ShapeMismatch {
            pred_w: pred.width(),
            pred_h: pred.height(),
            gt_w: gt.width(),
            gt_h: gt.height(),
        });
    }
    Ok(())
}

/// Binarization handling for Dice/IoU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DiceMode {
    /// Threshold the prediction before counting overlap.
    #[default]
    Binarized,
    /// Soft overlap on the raw prediction values.
    Continuous,
}

/// Every constant the metric suite depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Balance between object- and region-level structure terms.
    pub s_alpha: f64,
    /// β² of the weighted F-measure.
    pub wfm_beta2: f64,
    /// Footprint of the dependency blur.
    pub wfm_blur_ksize: usize,
    pub wfm_blur_sigma: f64,
    /// Background importance ν = 2 − exp(ln(base)/scale · D).
    pub wfm_decay_base: f64,
    pub wfm_decay_scale: f64,
    /// Binarization levels of the enhanced-alignment sweep; thresholds sit
    /// at (k + 0.5)/levels, strictly increasing by construction.
    pub e_levels: usize,
    /// Dice/IoU binarization threshold (prediction >= threshold).
    pub dice_threshold: f64,
    pub dice_mode: DiceMode,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            s_alpha: 0.5,
            wfm_beta2: 1.0,
            wfm_blur_ksize: 7,
            wfm_blur_sigma: 5.0,
            wfm_decay_base: 0.5,
            wfm_decay_scale: 5.0,
            e_levels: 256,
            dice_threshold: 0.5,
            dice_mode: DiceMode::Binarized,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if !(0.0..=1.0).contains(&self.s_alpha) {
            return Err(MetricError::InvalidConfig(format!(
                "s_alpha {} outside [0,1]",
                self.s_alpha
            )));
        }
        if self.e_levels == 0 {
            return Err(MetricError::InvalidConfig("e_levels must be >= 1".into()));
        }
        if self.wfm_blur_ksize % 2 == 0 {
            return Err(MetricError::InvalidConfig(format!(
                "wfm_blur_ksize {} must be odd",
                self.wfm_blur_ksize
            )));
        }
        Ok(())
    }

    /// Stable hex fingerprint of the full parameterization.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(16);
        for b in &digest[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// One evaluated image. `None` marks a metric skipped on degenerate input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerImageRecord {
    pub id: String,
    pub s_alpha: Option<f64>,
    pub wfm: Option<f64>,
    pub e_phi: Option<f64>,
    pub mae: Option<f64>,
    pub dice: Option<f64>,
    pub iou: Option<f64>,
    pub config_fingerprint: String,
}

impl PerImageRecord {
    fn field(&self, m: MetricKind) -> Option<f64> {
        match m {
            MetricKind::SAlpha => self.s_alpha,
            MetricKind::Wfm => self.wfm,
            MetricKind::EPhi => self.e_phi,
            MetricKind::Mae => self.mae,
            MetricKind::Dice => self.dice,
            MetricKind::Iou => self.iou,
        }
    }

    /// True when no metric was computable.
    pub fn fully_skipped(&self) -> bool {
        MetricKind::ALL.iter().all(|&m| self.field(m).is_none())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    SAlpha,
    Wfm,
    EPhi,
    Mae,
    Dice,
    Iou,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::SAlpha,
        MetricKind::Wfm,
        MetricKind::EPhi,
        MetricKind::Mae,
        MetricKind::Dice,
        MetricKind::Iou,
    ];
}

/// Mean of one metric over the records that carried it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricMean {
    pub mean: f64,
    pub count: usize,
}

/// Aggregate means plus the per-image rows they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_image: Vec<PerImageRecord>,
    pub s_alpha: Option<MetricMean>,
    pub wfm: Option<MetricMean>,
    pub e_phi: Option<MetricMean>,
    pub mae: Option<MetricMean>,
    pub dice: Option<MetricMean>,
    pub iou: Option<MetricMean>,
    /// Records with at least one skipped metric.
    pub skipped: usize,
    pub count: usize,
}

/// Neumaier compensated summation; keeps aggregate means honest to 1e-12
/// over long batches.
fn compensated_mean(values: impl Iterator<Item = f64>) -> Option<MetricMean> {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    let mut count = 0usize;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
        count += 1;
    }
    if count == 0 {
        None
    } else {
        Some(MetricMean {
            mean: (sum + compensation) / count as f64,
            count,
        })
    }
}

/// Compute all six metrics for one prediction/ground-truth pair.
///
/// Per-metric degeneracies (an empty ground truth for the weighted
/// F-measure) surface as skipped fields, never as batch failures.
pub fn evaluate_pair(
    id: &str,
    pred: &FloatMap,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<PerImageRecord, MetricError> {
    check_shapes(pred, gt)?;
    cfg.validate()?;
    let (dice, iou) = dice_iou(pred, gt, cfg)?;
    Ok(PerImageRecord {
        id: id.to_string(),
        s_alpha: Some(s_measure(pred, gt, cfg)?),
        wfm: match weighted_fmeasure(pred, gt, cfg) {
            Ok(v) => Some(v),
            Err(MetricError::Undefined(_)) => None,
            Err(e) => return Err(e),
        },
        e_phi: Some(e_measure_mean(pred, gt, cfg)?),
        mae: Some(mae(pred, gt)?),
        dice: Some(dice),
        iou: Some(iou),
        config_fingerprint: cfg.fingerprint(),
    })
}

/// Arithmetic means per metric over the non-skipped records.
pub fn aggregate(records: Vec<PerImageRecord>) -> Result<MetricReport, MetricError> {
    let mut means: [Option<MetricMean>; 6] = [None; 6];
    for (slot, kind) in means.iter_mut().zip(MetricKind::ALL.iter()) {
        *slot = compensated_mean(records.iter().filter_map(|r| r.field(*kind)));
    }
    if means.iter().all(|m| m.is_none()) {
        return Err(MetricError::EmptyReport);
    }
    let skipped = records
        .iter()
        .filter(|r| MetricKind::ALL.iter().any(|&m| r.field(m).is_none()))
        .count();
    let count = records.len();
    let [s_alpha, wfm, e_phi, mae, dice, iou] = means;
    Ok(MetricReport {
        per_image: records,
        s_alpha,
        wfm,
        e_phi,
        mae,
        dice,
        iou,
        skipped,
        count,
    })
}

#[cfg(test)]
mod tests;
