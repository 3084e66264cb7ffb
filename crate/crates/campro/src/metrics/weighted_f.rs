//! Weighted F-measure: precision/recall on dependency-corrected errors
//! with distance-decayed background importance.

use super::{check_shapes, MetricConfig, MetricError, EPS};
use crate::raster::{
    distance_transform, gaussian_blur, nearest_foreground, BinaryMask, FloatMap,
};

pub fn weighted_fmeasure(
    pred: &FloatMap,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<f64, MetricError> {
    check_shapes(pred, gt)?;
    let (w, h) = (gt.width(), gt.height());
    let fg_total = gt.count_set();
    if fg_total == 0 {
        return Err(MetricError::Undefined(
            "weighted F-measure needs a nonempty ground truth",
        ));
    }

    let error: Vec<f64> = pred
        .data()
        .iter()
        .zip(gt.data().iter())
        .map(|(&p, &g)| if g { 1.0 - p } else { p })
        .collect();

    // Background pixels inherit the error of their nearest foreground
    // pixel before the dependency blur.
    let nearest = nearest_foreground(gt);
    let substituted: Vec<f64> = error
        .iter()
        .zip(gt.data().iter())
        .enumerate()
        .map(|(i, (&e, &g))| if g { e } else { error[nearest[i] as usize] })
        .collect();
    let blurred = gaussian_blur(
        &FloatMap::new(w, h, substituted)?,
        cfg.wfm_blur_ksize,
        cfg.wfm_blur_sigma,
    )?;

    let distances = distance_transform(gt);
    let decay = cfg.wfm_decay_base.ln() / cfg.wfm_decay_scale;

    let mut tp_loss = 0.0;
    let mut fp = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if gt.data()[i] {
                // min(E, blurred E) on the object.
                let e = error[i].min(blurred.get(x, y));
                tp_loss += e;
            } else {
                let importance = 2.0 - (decay * distances.distance(x, y)).exp();
                fp += error[i] * importance;
            }
        }
    }

    let tpw = fg_total as f64 - tp_loss;
    let recall = 1.0 - tp_loss / fg_total as f64;
    let precision = tpw / (EPS + tpw + fp);
    let beta2 = cfg.wfm_beta2;
    Ok((1.0 + beta2) * recall * precision / (EPS + beta2 * precision + recall))
}
