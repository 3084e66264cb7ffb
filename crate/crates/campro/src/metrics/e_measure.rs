//! Mean enhanced-alignment measure over a sweep of binarization levels.
//!
//! At level k the prediction binarizes at (k + 0.5)/levels. Because the
//! per-level score depends only on the four (map, truth) co-occurrence
//! counts and the two means, a single histogram pass replaces the naive
//! levels×pixels sweep: a pixel with value p is foreground at exactly the
//! levels k <= floor(levels·p − 0.5), which is an exact rewrite of the
//! comparison p >= (k + 0.5)/levels.

use super::{check_shapes, MetricConfig, MetricError, EPS};
use crate::raster::{BinaryMask, FloatMap};

pub fn e_measure_mean(
    pred: &FloatMap,
    gt: &BinaryMask,
    cfg: &MetricConfig,
) -> Result<f64, MetricError> {
    check_shapes(pred, gt)?;
    let levels = cfg.e_levels;
    let n = gt.data().len();
    let nf = n as f64;
    let gt_fg = gt.count_set();

    // cutoff[i] = highest level at which pixel i is foreground, or none.
    // Histogram those per truth class, then suffix-sum to get pass counts
    // per level. The floor gives a candidate cutoff; the comparisons
    // against the rounded thresholds themselves settle pixels that land
    // within a ulp of a boundary, so the counts match a per-level sweep
    // bit for bit.
    let threshold = |k: i64| (k as f64 + 0.5) / levels as f64;
    let mut fg_hist = vec![0u64; levels];
    let mut bg_hist = vec![0u64; levels];
    for (&p, &g) in pred.data().iter().zip(gt.data().iter()) {
        let mut c = (levels as f64 * p - 0.5).floor() as i64;
        c = c.clamp(-1, levels as i64 - 1);
        while c >= 0 && p < threshold(c) {
            c -= 1;
        }
        while c + 1 < levels as i64 && p >= threshold(c + 1) {
            c += 1;
        }
        if c < 0 {
            continue;
        }
        if g {
            fg_hist[c as usize] += 1;
        } else {
            bg_hist[c as usize] += 1;
        }
    }

    let norm = nf - 1.0 + EPS;
    let mut fg_pass = 0u64; // foreground pixels passing the current level
    let mut bg_pass = 0u64;
    let mut total = 0.0;
    for k in (0..levels).rev() {
        fg_pass += fg_hist[k];
        bg_pass += bg_hist[k];
        let n1 = fg_pass + bg_pass;

        let sum = if gt_fg == 0 {
            (n as u64 - n1) as f64
        } else if gt_fg == n {
            n1 as f64
        } else {
            let mu_fm = n1 as f64 / nf;
            let mu_gt = gt_fg as f64 / nf;
            let counts = [
                (fg_pass, 1.0, 1.0),
                (bg_pass, 1.0, 0.0),
                (gt_fg as u64 - fg_pass, 0.0, 1.0),
                ((n - gt_fg) as u64 - bg_pass, 0.0, 0.0),
            ];
            let mut s = 0.0;
            for (count, fm_val, gt_val) in counts {
                if count == 0 {
                    continue;
                }
                let phi_fm = fm_val - mu_fm;
                let phi_gt = gt_val - mu_gt;
                let align = 2.0 * phi_fm * phi_gt / (phi_fm * phi_fm + phi_gt * phi_gt + EPS);
                let enhanced = (align + 1.0) * (align + 1.0) / 4.0;
                s += count as f64 * enhanced;
            }
            s
        };
        total += (sum / norm).clamp(0.0, 1.0);
    }
    Ok(total / levels as f64)
}
