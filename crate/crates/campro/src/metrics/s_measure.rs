//! Structure measure: object-aware foreground/background similarity
//! blended with a four-quadrant region SSIM about the mask centroid.

use super::{check_shapes, MetricConfig, MetricError, EPS};
use crate::raster::{BinaryMask, FloatMap};

pub fn s_measure(
    pred: &FloatMap,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<f64, MetricError> {
    check_shapes(pred, gt)?;
    let n = gt.data().len();
    let fg = gt.count_set();
    let score = if fg == 0 {
        1.0 - pred.mean()
    } else if fg == n {
        pred.mean()
    } else {
        let alpha = cfg.s_alpha;
        alpha * object_term(pred, gt, fg) + (1.0 - alpha) * region_term(pred, gt)
    };
    Ok(score.clamp(0.0, 1.0))
}

/// 2x̄ / (x̄² + 1 + σ) over a pixel selection; σ is the sample standard
/// deviation, zero for singleton selections.
fn selection_score(sum: f64, sum_sq: f64, count: usize) -> f64 {
    let nf = count as f64;
    let mean = sum / nf;
    let sigma = if count < 2 {
        0.0
    } else {
        ((sum_sq - sum * sum / nf).max(0.0) / (nf - 1.0)).sqrt()
    };
    2.0 * mean / (mean * mean + 1.0 + sigma + EPS)
}

fn object_term(pred: &FloatMap, gt: &BinaryMask, fg: usize) -> f64 {
    let n = gt.data().len();
    let mut fg_sum = 0.0;
    let mut fg_sq = 0.0;
    let mut bg_sum = 0.0;
    let mut bg_sq = 0.0;
    for (&p, &g) in pred.data().iter().zip(gt.data().iter()) {
        if g {
            fg_sum += p;
            fg_sq += p * p;
        } else {
            let q = 1.0 - p;
            bg_sum += q;
            bg_sq += q * q;
        }
    }
    let u = fg as f64 / n as f64;
    u * selection_score(fg_sum, fg_sq, fg) + (1.0 - u) * selection_score(bg_sum, bg_sq, n - fg)
}

/// Mask centroid in 1-based coordinates, rounded half away from zero.
fn centroid(gt: &BinaryMask) -> (usize, usize) {
    let (w, h) = (gt.width(), gt.height());
    let mut total = 0usize;
    let mut sx = 0usize;
    let mut sy = 0usize;
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) {
                total += 1;
                sx += x + 1;
                sy += y + 1;
            }
        }
    }
    debug_assert!(total > 0, "region term requires a nondegenerate mask");
    (
        (sx as f64 / total as f64).round() as usize,
        (sy as f64 / total as f64).round() as usize,
    )
}

/// The published region SSIM with N−1+eps variance normalization.
///
/// Moments are deviation sums about the region means, not raw-moment
/// differences: the `alpha != 0` branch must see an exact zero whenever
/// one factor vanishes identically, which cancellation-prone raw moments
/// cannot guarantee. Zero-area quadrants carry zero weight; their value
/// is fixed at 0.
fn quadrant_ssim(pred: &FloatMap, gt: &BinaryMask, xs: (usize, usize), ys: (usize, usize)) -> f64 {
    let n = (xs.1 - xs.0) * (ys.1 - ys.0);
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut p_sum = 0.0;
    let mut g_sum = 0.0;
    for y in ys.0..ys.1 {
        for x in xs.0..xs.1 {
            p_sum += pred.get(x, y);
            g_sum += if gt.get(x, y) { 1.0 } else { 0.0 };
        }
    }
    let x_mean = p_sum / nf;
    let y_mean = g_sum / nf;
    let mut sx2 = 0.0;
    let mut sy2 = 0.0;
    let mut sxy = 0.0;
    for y in ys.0..ys.1 {
        for x in xs.0..xs.1 {
            let dp = pred.get(x, y) - x_mean;
            let dg = if gt.get(x, y) { 1.0 } else { 0.0 } - y_mean;
            sx2 += dp * dp;
            sy2 += dg * dg;
            sxy += dp * dg;
        }
    }
    let norm = nf - 1.0 + EPS;
    sx2 /= norm;
    sy2 /= norm;
    sxy /= norm;
    let alpha = 4.0 * x_mean * y_mean * sxy;
    let beta = (x_mean * x_mean + y_mean * y_mean) * (sx2 + sy2);
    if alpha != 0.0 {
        alpha / (beta + EPS)
    } else if beta == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn region_term(pred: &FloatMap, gt: &BinaryMask) -> f64 {
    let (w, h) = (gt.width(), gt.height());
    let (cx, cy) = centroid(gt);
    let area = (w * h) as f64;
    let mut score = 0.0;
    for (xs, ys) in [
        ((0, cx), (0, cy)),
        ((cx, w), (0, cy)),
        ((0, cx), (cy, h)),
        ((cx, w), (cy, h)),
    ] {
        let weight = ((xs.1 - xs.0) * (ys.1 - ys.0)) as f64 / area;
        score += weight * quadrant_ssim(pred, gt, xs, ys);
    }
    score
}
