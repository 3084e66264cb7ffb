//! Straightforward reference implementations used as oracles in tests.
//!
//! Everything here is a literal, unoptimized transcription of the
//! published metric definitions, sharing no code with the production
//! paths in [`crate::metrics`]: blurs are dense 2-D convolutions,
//! distance transforms are all-pairs scans, and the enhanced-alignment
//! sweep rebuilds the binarized map at every level. Only test targets
//! compile this module.

use crate::raster::{BinaryMask, FloatMap};

const EPS: f64 = f64::EPSILON;

/// Mean absolute error.
pub fn mae(pred: &FloatMap, gt: &BinaryMask) -> f64 {
    let total: f64 = pred
        .data()
        .iter()
        .zip(gt.data().iter())
        .map(|(&p, &g)| (p - if g { 1.0 } else { 0.0 }).abs())
        .sum();
    total / pred.data().len() as f64
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (N−1), zero for fewer than two samples.
fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Structure measure.
pub fn s_measure(pred: &FloatMap, gt: &BinaryMask, alpha: f64) -> f64 {
    let n = gt.data().len() as f64;
    let fg = gt.count_set() as f64;
    let y = fg / n;
    let q = if y == 0.0 {
        1.0 - mean(pred.data())
    } else if y == 1.0 {
        mean(pred.data())
    } else {
        alpha * s_object(pred, gt) + (1.0 - alpha) * s_region(pred, gt)
    };
    q.clamp(0.0, 1.0)
}

fn object_score(values: &[f64]) -> f64 {
    let x = mean(values);
    let sigma = sample_std(values);
    2.0 * x / (x * x + 1.0 + sigma + EPS)
}

fn s_object(pred: &FloatMap, gt: &BinaryMask) -> f64 {
    let fg: Vec<f64> = pred
        .data()
        .iter()
        .zip(gt.data().iter())
        .filter(|(_, &g)| g)
        .map(|(&p, _)| p)
        .collect();
    let bg: Vec<f64> = pred
        .data()
        .iter()
        .zip(gt.data().iter())
        .filter(|(_, &g)| !g)
        .map(|(&p, _)| 1.0 - p)
        .collect();
    let u = gt.count_set() as f64 / gt.data().len() as f64;
    u * object_score(&fg) + (1.0 - u) * object_score(&bg)
}

/// Centroid of the set pixels in 1-based coordinates, rounded half away
/// from zero (the published convention).
fn centroid_1based(gt: &BinaryMask) -> (usize, usize) {
    let (w, h) = (gt.width(), gt.height());
    let total = gt.count_set();
    if total == 0 {
        return (w.div_ceil(2), h.div_ceil(2));
    }
    let mut sx = 0usize;
    let mut sy = 0usize;
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) {
                sx += x + 1;
                sy += y + 1;
            }
        }
    }
    let cx = (sx as f64 / total as f64).round() as usize;
    let cy = (sy as f64 / total as f64).round() as usize;
    (cx, cy)
}

/// The region SSIM of the published structure measure.
fn region_ssim(pred: &[f64], gt: &[f64]) -> f64 {
    let n = pred.len();
    if n == 0 {
        // Zero-area region: contributes with zero weight; fix the value.
        return 0.0;
    }
    let nf = n as f64;
    let x = mean(pred);
    let y = mean(gt);
    let mut sx2 = 0.0;
    let mut sy2 = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sx2 += (pred[i] - x) * (pred[i] - x);
        sy2 += (gt[i] - y) * (gt[i] - y);
        sxy += (pred[i] - x) * (gt[i] - y);
    }
    sx2 /= nf - 1.0 + EPS;
    sy2 /= nf - 1.0 + EPS;
    sxy /= nf - 1.0 + EPS;
    let alpha = 4.0 * x * y * sxy;
    let beta = (x * x + y * y) * (sx2 + sy2);
    if alpha != 0.0 {
        alpha / (beta + EPS)
    } else if beta == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn s_region(pred: &FloatMap, gt: &BinaryMask) -> f64 {
    let (w, h) = (gt.width(), gt.height());
    let (cx, cy) = centroid_1based(gt);
    let area = (w * h) as f64;

    // Quadrants split at the centroid, upper-left region cx columns wide
    // and cy rows tall.
    let mut score = 0.0;
    for (x_range, y_range) in [
        ((0, cx), (0, cy)),
        ((cx, w), (0, cy)),
        ((0, cx), (cy, h)),
        ((cx, w), (cy, h)),
    ] {
        let mut p_region = Vec::new();
        let mut g_region = Vec::new();
        for y in y_range.0..y_range.1 {
            for x in x_range.0..x_range.1 {
                p_region.push(pred.get(x, y));
                g_region.push(if gt.get(x, y) { 1.0 } else { 0.0 });
            }
        }
        let weight = p_region.len() as f64 / area;
        score += weight * region_ssim(&p_region, &g_region);
    }
    score
}

/// Enhanced-alignment score of one binarized map.
fn em_score(fm: &[bool], gt: &BinaryMask) -> f64 {
    let n = gt.data().len();
    let nf = n as f64;
    let gt_fg = gt.count_set();
    let sum: f64 = if gt_fg == 0 {
        fm.iter().map(|&f| if f { 0.0 } else { 1.0 }).sum()
    } else if gt_fg == n {
        fm.iter().map(|&f| if f { 1.0 } else { 0.0 }).sum()
    } else {
        let mu_fm = fm.iter().filter(|&&f| f).count() as f64 / nf;
        let mu_gt = gt_fg as f64 / nf;
        fm.iter()
            .zip(gt.data().iter())
            .map(|(&f, &g)| {
                let phi_fm = if f { 1.0 } else { 0.0 } - mu_fm;
                let phi_gt = if g { 1.0 } else { 0.0 } - mu_gt;
                let align = 2.0 * phi_fm * phi_gt / (phi_fm * phi_fm + phi_gt * phi_gt + EPS);
                (align + 1.0) * (align + 1.0) / 4.0
            })
            .sum()
    };
    (sum / (nf - 1.0 + EPS)).clamp(0.0, 1.0)
}

/// Mean enhanced-alignment measure over midpoint binarization levels
/// (k + 0.5)/levels.
pub fn e_measure_mean(pred: &FloatMap, gt: &BinaryMask, levels: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..levels {
        let t = (k as f64 + 0.5) / levels as f64;
        let fm: Vec<bool> = pred.data().iter().map(|&p| p >= t).collect();
        total += em_score(&fm, gt);
    }
    total / levels as f64
}

/// Weighted F-measure; `None` when the ground truth is empty.
pub fn weighted_fmeasure(pred: &FloatMap, gt: &BinaryMask, beta2: f64) -> Option<f64> {
    let (w, h) = (gt.width(), gt.height());
    let n = w * h;
    let fg_total = gt.count_set();
    if fg_total == 0 {
        return None;
    }

    let gtf: Vec<f64> = gt.data().iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
    let error: Vec<f64> = pred
        .data()
        .iter()
        .zip(gtf.iter())
        .map(|(&p, &g)| (p - g).abs())
        .collect();

    // All-pairs nearest foreground pixel: smallest distance, then
    // smallest linear index.
    let mut nearest = vec![0usize; n];
    let mut dist = vec![0.0f64; n];
    for y in 0..h {
        for x in 0..w {
            let mut best = u64::MAX;
            let mut best_idx = usize::MAX;
            for sy in 0..h {
                for sx in 0..w {
                    if gt.get(sx, sy) {
                        let dx = x as i64 - sx as i64;
                        let dy = y as i64 - sy as i64;
                        let d = (dx * dx + dy * dy) as u64;
                        if d < best {
                            best = d;
                            best_idx = sy * w + sx;
                        }
                    }
                }
            }
            nearest[y * w + x] = best_idx;
            dist[y * w + x] = (best as f64).sqrt();
        }
    }

    // Substitute background errors with the error at the nearest
    // foreground pixel.
    let mut substituted = error.clone();
    for i in 0..n {
        if !gt.data()[i] {
            substituted[i] = error[nearest[i]];
        }
    }

    // Dense 7x7 sigma-5 Gaussian with replicated borders.
    let mut taps = [0.0f64; 7];
    let mut tap_sum = 0.0;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - 3.0;
        *t = (-d * d / 50.0).exp();
        tap_sum += *t;
    }
    for t in taps.iter_mut() {
        *t /= tap_sum;
    }
    let mut blurred = vec![0.0f64; n];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -3..=3isize {
                for dx in -3..=3isize {
                    let sy = (y + dy).clamp(0, h as isize - 1) as usize;
                    let sx = (x + dx).clamp(0, w as isize - 1) as usize;
                    acc += taps[(dy + 3) as usize] * taps[(dx + 3) as usize]
                        * substituted[sy * w + sx];
                }
            }
            blurred[y as usize * w + x as usize] = acc;
        }
    }

    // Keep the smaller of the raw and the neighborhood-aware error on
    // foreground pixels.
    let mut min_e = error.clone();
    for i in 0..n {
        if gt.data()[i] && blurred[i] < error[i] {
            min_e[i] = blurred[i];
        }
    }

    // Background importance decays with distance from the object.
    let decay = (0.5f64).ln() / 5.0;
    let mut tp_loss = 0.0;
    let mut fp = 0.0;
    for i in 0..n {
        let importance = if gt.data()[i] {
            1.0
        } else {
            2.0 - (decay * dist[i]).exp()
        };
        let weighted = min_e[i] * importance;
        if gt.data()[i] {
            tp_loss += weighted;
        } else {
            fp += weighted;
        }
    }
    let tpw = fg_total as f64 - tp_loss;
    let recall = 1.0 - tp_loss / fg_total as f64;
    let precision = tpw / (EPS + tpw + fp);
    Some((1.0 + beta2) * recall * precision / (EPS + beta2 * precision + recall))
}

/// Dice and IoU of the prediction binarized at `threshold`.
/// Both-empty pairs score 1.0.
pub fn dice_iou(pred: &FloatMap, gt: &BinaryMask, threshold: f64) -> (f64, f64) {
    let mut inter = 0usize;
    let mut a = 0usize;
    let mut b = 0usize;
    for (&p, &g) in pred.data().iter().zip(gt.data().iter()) {
        let pb = p >= threshold;
        if pb {
            a += 1;
        }
        if g {
            b += 1;
        }
        if pb && g {
            inter += 1;
        }
    }
    if a == 0 && b == 0 {
        return (1.0, 1.0);
    }
    let dice = 2.0 * inter as f64 / (a + b) as f64;
    let union = a + b - inter;
    let iou = if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    };
    (dice, iou)
}
