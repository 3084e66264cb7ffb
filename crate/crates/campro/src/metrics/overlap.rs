//! Dice coefficient and intersection over union.

use super::{check_shapes, DiceMode, MetricConfig, MetricError};
use crate::raster::{BinaryMask, FloatMap};

/// Overlap of the prediction with the mask.
///
/// In binarized mode (the default protocol) the prediction thresholds at
/// `cfg.dice_threshold` first; continuous mode uses the soft counts
/// `2Σpg / (Σp + Σg)` and `Σpg / (Σp + Σg − Σpg)`. Two empty operands
/// score 1.0 in both modes.
pub fn dice_iou(
    pred: &FloatMap,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<(f64, f64), MetricError> {
    check_shapes(pred, gt)?;
    match cfg.dice_mode {
        DiceMode::Binarized => {
            let mut inter = 0u64;
            let mut a = 0u64;
            let mut b = 0u64;
            for (&p, &g) in pred.data().iter().zip(gt.data().iter()) {
                let pb = p >= cfg.dice_threshold;
                a += u64::from(pb);
                b += u64::from(g);
                inter += u64::from(pb && g);
            }
            if a + b == 0 {
                return Ok((1.0, 1.0));
            }
            let dice = 2.0 * inter as f64 / (a + b) as f64;
            let union = a + b - inter;
            Ok((dice, inter as f64 / union as f64))
        }
        DiceMode::Continuous => {
            let mut inter = 0.0;
            let mut a = 0.0;
            let mut b = 0.0;
            for (&p, &g) in pred.data().iter().zip(gt.data().iter()) {
                a += p;
                if g {
                    b += 1.0;
                    inter += p;
                }
            }
            if a + b == 0.0 {
                return Ok((1.0, 1.0));
            }
            Ok((2.0 * inter / (a + b), inter / (a + b - inter)))
        }
    }
}
