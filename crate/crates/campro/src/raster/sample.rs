//! Histograms, resampling, and intensity normalization.

use super::{check_dims, FloatMap, GrayImage, RasterError};

/// Intensity histogram: `counts[v]` is the number of pixels at value `v`.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &v in img.data() {
        counts[v as usize] += 1;
    }
    counts
}

/// Bilinear resampling with half-pixel centers (align-corners off).
///
/// Sample coordinates clamp to the source frame, and results round half
/// away from zero back to 8 bits.
pub fn resize_bilinear(img: &GrayImage, w: usize, h: usize) -> Result<GrayImage, RasterError> {
    check_dims(w, h)?;
    if w == img.width() && h == img.height() {
        return Ok(img.clone());
    }
    let sx_scale = img.width() as f64 / w as f64;
    let sy_scale = img.height() as f64 / h as f64;
    let max_x = img.width() as f64 - 1.0;
    let max_y = img.height() as f64 - 1.0;

    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let sy = ((y as f64 + 0.5) * sy_scale - 0.5).clamp(0.0, max_y);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(img.height() - 1);
        let fy = sy - y0 as f64;
        for x in 0..w {
            let sx = ((x as f64 + 0.5) * sx_scale - 0.5).clamp(0.0, max_x);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(img.width() - 1);
            let fx = sx - x0 as f64;

            let tl = f64::from(img.get(x0, y0));
            let tr = f64::from(img.get(x1, y0));
            let bl = f64::from(img.get(x0, y1));
            let br = f64::from(img.get(x1, y1));
            let top = tl + (tr - tl) * fx;
            let bot = bl + (br - bl) * fx;
            let v = top + (bot - top) * fy;
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(w, h, data)
}

/// Percentile of sorted values with linear interpolation between ranks.
fn percentile_sorted(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = pct / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Clip intensities to the [lo_pct, hi_pct] percentile range, then rescale
/// the clipped range onto [0,1]. A degenerate range (constant input, or
/// percentiles that coincide) maps to all-zero.
pub fn truncate_normalize(
    img: &GrayImage,
    lo_pct: f64,
    hi_pct: f64,
) -> Result<FloatMap, RasterError> {
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct >= hi_pct {
        return Err(RasterError::InvalidRange {
            lo: lo_pct,
            hi: hi_pct,
        });
    }
    let mut sorted: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite intensities"));
    let lo = percentile_sorted(&sorted, lo_pct);
    let hi = percentile_sorted(&sorted, hi_pct);
    let span = hi - lo;

    let data = img
        .data()
        .iter()
        .map(|&v| {
            if span <= 0.0 {
                0.0
            } else {
                (f64::from(v).clamp(lo, hi) - lo) / span
            }
        })
        .collect();
    FloatMap::new(img.width(), img.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn histogram_counts_all_zero_image() {
        let img = GrayImage::zeros(4, 4);
        let counts = histogram(&img);
        assert_eq!(counts[0], 16);
        assert_eq!(counts[1..].iter().sum::<u64>(), 0);
    }

    #[test]
    fn histogram_of_ramp_hits_every_bin_once() {
        let img = GrayImage::from_fn(256, 1, |x, _| x as u8);
        let counts = histogram(&img);
        assert!(counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn histogram_conserves_pixel_count() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let img = GrayImage::from_fn(13, 9, |_, _| rng.random());
        assert_eq!(histogram(&img).iter().sum::<u64>(), 13 * 9);
    }

    #[test]
    fn identity_resize_is_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let img = GrayImage::from_fn(7, 5, |_, _| rng.random());
        assert_eq!(resize_bilinear(&img, 7, 5).unwrap(), img);
    }

    #[test]
    fn constant_image_resizes_to_constant() {
        let img = GrayImage::from_fn(5, 3, |_, _| 201);
        let out = resize_bilinear(&img, 11, 17).unwrap();
        assert!(out.data().iter().all(|&v| v == 201));
    }

    #[test]
    fn checkerboard_upscale_interpolates_hand_weights() {
        // 2x2 checkerboard [[0,200],[200,0]] doubled to 4x4. With
        // half-pixel centers the sample grid is {-0.25, 0.25, 0.75, 1.25},
        // clamped to [0,1]: offsets {0, 0.25, 0.75, 1}.
        let img =
            GrayImage::new(2, 2, vec![0, 200, 200, 0]).unwrap();
        let out = resize_bilinear(&img, 4, 4).unwrap();
        let pos = [0.0f64, 0.25, 0.75, 1.0];
        for (yi, &fy) in pos.iter().enumerate() {
            for (xi, &fx) in pos.iter().enumerate() {
                let top = 0.0 + (200.0 - 0.0) * fx;
                let bot = 200.0 + (0.0 - 200.0) * fx;
                let expected = (top + (bot - top) * fy).round() as u8;
                assert_eq!(out.get(xi, yi), expected, "at ({xi},{yi})");
            }
        }
    }

    #[test]
    fn zero_target_size_is_rejected() {
        let img = GrayImage::zeros(4, 4);
        assert!(matches!(
            resize_bilinear(&img, 0, 4),
            Err(RasterError::BadDimensions { .. })
        ));
    }

    #[test]
    fn constant_image_normalizes_to_zero() {
        let img = GrayImage::from_fn(6, 6, |_, _| 88);
        let out = truncate_normalize(&img, 0.5, 99.5).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_normalizes_monotonically_to_unit_range() {
        let img = GrayImage::from_fn(256, 1, |x, _| x as u8);
        let out = truncate_normalize(&img, 0.5, 99.5).unwrap();
        // Hand percentile on the ramp: rank = pct/100·255.
        let lo = 0.005 * 255.0;
        let hi = 0.995 * 255.0;
        assert_eq!(out.get(0, 0), 0.0);
        assert_eq!(out.get(255, 0), 1.0);
        for x in 1..256 {
            assert!(out.get(x, 0) >= out.get(x - 1, 0), "monotone at {x}");
        }
        // An interior value rescales linearly.
        let expected = (128.0f64.clamp(lo, hi) - lo) / (hi - lo);
        assert!((out.get(128, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn outlier_is_clipped_before_rescale() {
        // 99 zeros and a single 255. The 99th percentile of the sorted
        // values interpolates between zeros, so the outlier clips to it
        // and the map collapses to zero.
        let mut data = vec![0u8; 100];
        data[57] = 255;
        let img = GrayImage::new(10, 10, data).unwrap();
        let out = truncate_normalize(&img, 0.0, 99.0).unwrap();
        // Percentile oracle on sorted values: rank = 0.99·99 = 98.01, which
        // interpolates sorted[98]=0 and sorted[99]=255 to hi = 2.55. The
        // outlier clips to 2.55 and rescales to exactly 1; zeros stay zero.
        for (i, &v) in out.data().iter().enumerate() {
            if i == 57 {
                assert_eq!(v, 1.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn degenerate_percentile_order_is_rejected() {
        let img = GrayImage::zeros(4, 4);
        assert!(matches!(
            truncate_normalize(&img, 50.0, 50.0),
            Err(RasterError::InvalidRange { .. })
        ));
        assert!(truncate_normalize(&img, 99.0, 1.0).is_err());
    }
}
