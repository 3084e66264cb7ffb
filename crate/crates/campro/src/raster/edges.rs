//! Canny edge detection with the Sobel gradient magnitude as a byproduct.

use serde::{Deserialize, Serialize};

use super::filter::{gaussian_kernel, separable_filter};
use super::{BinaryMask, FloatMap, GrayImage, RasterError};

/// Largest attainable Sobel magnitude on an 8-bit image: both axis
/// responses peak at 4·255.
const MAX_SOBEL_MAGNITUDE: f64 = 1442.4978335233954; // 4·255·√2

/// Canny parameters. Thresholds are in Sobel-magnitude units of an 8-bit
/// image (0 ..≈ 1442).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low: 50.0,
            high: 150.0,
        }
    }
}

/// Classical Canny: Gaussian smooth, Sobel gradients, non-maximum
/// suppression, hysteresis with `low`/`high`.
///
/// Returns the binary edge mask and the Sobel gradient magnitude of the
/// smoothed image scaled into [0,1] by the theoretical maximum. The
/// smoothing kernel spans three sigmas on each side; borders replicate.
/// The outermost one-pixel frame is never an edge.
pub fn canny(
    img: &GrayImage,
    sigma: f64,
    low: f64,
    high: f64,
) -> Result<(BinaryMask, FloatMap), RasterError> {
    if !(low <= high) || low < 0.0 {
        return Err(RasterError::InvalidThreshold { low, high });
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(RasterError::InvalidSigma(sigma));
    }
    let (w, h) = (img.width(), img.height());

    let plane: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    let ksize = 2 * (3.0 * sigma).ceil() as usize + 1;
    let smoothed = separable_filter(&plane, w, h, &gaussian_kernel(ksize, sigma));

    let (gx, gy) = sobel(&smoothed, w, h);
    let mag: Vec<f64> = gx
        .iter()
        .zip(gy.iter())
        .map(|(&x, &y)| x.hypot(y))
        .collect();

    let thinned = non_maximum_suppression(&mag, &gx, &gy, w, h);
    let edges = hysteresis(&thinned, w, h, low, high);

    let magnitude = FloatMap::new(
        w,
        h,
        mag.into_iter()
            .map(|v| (v / MAX_SOBEL_MAGNITUDE).min(1.0))
            .collect(),
    )?;
    Ok((edges, magnitude))
}

/// Convenience wrapper over [`canny`] for a parameter struct.
pub fn canny_with(img: &GrayImage, p: &CannyParams) -> Result<(BinaryMask, FloatMap), RasterError> {
    canny(img, p.sigma, p.low, p.high)
}

/// 3×3 Sobel gradients with replicated borders, y increasing downward.
fn sobel(plane: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let clamp_w = |i: isize| i.clamp(0, w as isize - 1) as usize;
    let clamp_h = |i: isize| i.clamp(0, h as isize - 1) as usize;
    let at = |x: isize, y: isize| plane[clamp_h(y) * w + clamp_w(x)];

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let tl = at(x - 1, y - 1);
            let tc = at(x, y - 1);
            let tr = at(x + 1, y - 1);
            let ml = at(x - 1, y);
            let mr = at(x + 1, y);
            let bl = at(x - 1, y + 1);
            let bc = at(x, y + 1);
            let br = at(x + 1, y + 1);
            let i = y as usize * w + x as usize;
            gx[i] = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            gy[i] = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
        }
    }
    (gx, gy)
}

/// Keep pixels that are local maxima along the quantized gradient
/// direction. Plateau ties resolve to the neighbor earlier in raster
/// order: strictly greater than the predecessor, at least the successor.
/// The one-pixel frame is suppressed.
fn non_maximum_suppression(
    mag: &[f64],
    gx: &[f64],
    gy: &[f64],
    w: usize,
    h: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            // (predecessor, successor) in raster order along the direction.
            let (before, after) = if !(22.5..157.5).contains(&angle) {
                (mag[i - 1], mag[i + 1])
            } else if angle < 67.5 {
                (mag[i - w - 1], mag[i + w + 1])
            } else if angle < 112.5 {
                (mag[i - w], mag[i + w])
            } else {
                (mag[i - w + 1], mag[i + w - 1])
            };
            if m > before && m >= after {
                out[i] = m;
            }
        }
    }
    out
}

/// Breadth-first hysteresis: seeds at `mag >= high`, grows 8-connected
/// through `mag >= low`.
fn hysteresis(mag: &[f64], w: usize, h: usize, low: f64, high: f64) -> BinaryMask {
    let mut edges = vec![false; w * h];
    if w < 3 || h < 3 {
        return BinaryMask::new(w, h, edges).expect("dims checked by caller");
    }
    let mut stack = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            if mag[i] >= high && !edges[i] {
                edges[i] = true;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for (nx, ny) in neighbors8(cx, cy) {
                        if nx == 0 || ny == 0 || nx >= w - 1 || ny >= h - 1 {
                            continue;
                        }
                        let j = ny * w + nx;
                        if !edges[j] && mag[j] >= low {
                            edges[j] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    BinaryMask::new(w, h, edges).expect("dims checked by caller")
}

fn neighbors8(x: usize, y: usize) -> [(usize, usize); 8] {
    [
        (x - 1, y - 1),
        (x, y - 1),
        (x + 1, y - 1),
        (x - 1, y),
        (x + 1, y),
        (x - 1, y + 1),
        (x, y + 1),
        (x + 1, y + 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rejects_inverted_thresholds() {
        let img = GrayImage::zeros(8, 8);
        assert!(matches!(
            canny(&img, 1.4, 100.0, 50.0),
            Err(RasterError::InvalidThreshold { .. })
        ));
    }

    #[test]
    fn constant_image_has_no_edges_and_zero_magnitude() {
        let img = GrayImage::from_fn(16, 16, |_, _| 93);
        let (edges, mag) = canny(&img, 1.4, 50.0, 150.0).unwrap();
        assert_eq!(edges.count_set(), 0);
        assert!(mag.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_step_yields_one_vertical_line() {
        let img = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0 } else { 255 });
        let (edges, _) = canny(&img, 1.4, 50.0, 150.0).unwrap();
        assert!(edges.count_set() > 0);
        // All edge pixels share one x-column.
        let mut col = None;
        for y in 0..16 {
            for x in 0..16 {
                if edges.get(x, y) {
                    match col {
                        None => col = Some(x),
                        Some(c) => assert_eq!(c, x, "edge strays from a single column"),
                    }
                }
            }
        }
    }

    #[test]
    fn edges_only_where_magnitude_is_positive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let img = GrayImage::from_fn(24, 24, |_, _| rng.random::<u8>());
        let (edges, mag) = canny(&img, 1.4, 50.0, 150.0).unwrap();
        for y in 0..24 {
            for x in 0..24 {
                if edges.get(x, y) {
                    assert!(mag.get(x, y) > 0.0);
                }
            }
        }
    }

    // The straightforward reference Canny: dense 2-D Gaussian convolution,
    // per-pixel Sobel, direct NMS, recursive hysteresis. Written against
    // the same documented conventions but sharing no code with the
    // production path.
    mod oracle {
        use crate::raster::{BinaryMask, GrayImage};

        fn gauss2d(img: &GrayImage, sigma: f64) -> Vec<f64> {
            let r = (3.0 * sigma).ceil() as isize;
            let (w, h) = (img.width() as isize, img.height() as isize);
            let mut taps = Vec::new();
            let mut sum = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let t = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                    taps.push((dx, dy, t));
                    sum += t;
                }
            }
            let mut out = vec![0.0; (w * h) as usize];
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for &(dx, dy, t) in &taps {
                        let sx = (x + dx).clamp(0, w - 1) as usize;
                        let sy = (y + dy).clamp(0, h - 1) as usize;
                        acc += t * f64::from(img.get(sx, sy));
                    }
                    out[(y * w + x) as usize] = acc / sum;
                }
            }
            out
        }

        pub fn canny_reference(img: &GrayImage, sigma: f64, low: f64, high: f64) -> BinaryMask {
            let (w, h) = (img.width(), img.height());
            let sm = gauss2d(img, sigma);
            let at = |x: isize, y: isize| {
                sm[(y.clamp(0, h as isize - 1) as usize) * w + x.clamp(0, w as isize - 1) as usize]
            };
            let mut gx = vec![0.0; w * h];
            let mut gy = vec![0.0; w * h];
            let mut mag = vec![0.0; w * h];
            for y in 0..h as isize {
                for x in 0..w as isize {
                    let sx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                        - at(x - 1, y - 1)
                        - 2.0 * at(x - 1, y)
                        - at(x - 1, y + 1);
                    let sy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                        - at(x - 1, y - 1)
                        - 2.0 * at(x, y - 1)
                        - at(x + 1, y - 1);
                    let i = y as usize * w + x as usize;
                    gx[i] = sx;
                    gy[i] = sy;
                    mag[i] = (sx * sx + sy * sy).sqrt();
                }
            }
            // NMS, interior only.
            let mut thin = vec![0.0; w * h];
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let i = y * w + x;
                    if mag[i] == 0.0 {
                        continue;
                    }
                    let mut a = gy[i].atan2(gx[i]).to_degrees();
                    if a < 0.0 {
                        a += 180.0;
                    }
                    let (before, after) = if a < 22.5 || a >= 157.5 {
                        (mag[i - 1], mag[i + 1])
                    } else if a < 67.5 {
                        (mag[i - w - 1], mag[i + w + 1])
                    } else if a < 112.5 {
                        (mag[i - w], mag[i + w])
                    } else {
                        (mag[i - w + 1], mag[i + w - 1])
                    };
                    if mag[i] > before && mag[i] >= after {
                        thin[i] = mag[i];
                    }
                }
            }
            // Hysteresis by repeated sweeping until a fixed point.
            let mut strong = vec![false; w * h];
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    strong[y * w + x] = thin[y * w + x] >= high;
                }
            }
            loop {
                let mut changed = false;
                for y in 1..h - 1 {
                    for x in 1..w - 1 {
                        let i = y * w + x;
                        if strong[i] || thin[i] < low {
                            continue;
                        }
                        'scan: for dy in -1isize..=1 {
                            for dx in -1isize..=1 {
                                if dx == 0 && dy == 0 {
                                    continue;
                                }
                                let j = (y as isize + dy) as usize * w + (x as isize + dx) as usize;
                                if strong[j] {
                                    strong[i] = true;
                                    changed = true;
                                    break 'scan;
                                }
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            BinaryMask::new(w, h, strong).unwrap()
        }
    }

    #[test]
    fn step_edge_is_one_line_in_both_implementations() {
        // A symmetric step puts the two candidate columns at an exact
        // magnitude tie in real arithmetic; rounding decides which of
        // x=7/x=8 wins, and it may differ between numerically distinct
        // implementations. Both must still produce a single full-height
        // line at the step.
        let img = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0 } else { 255 });
        let (edges, _) = canny(&img, 1.4, 50.0, 150.0).unwrap();
        let reference = oracle::canny_reference(&img, 1.4, 50.0, 150.0);
        for (name, mask) in [("impl", &edges), ("oracle", &reference)] {
            let mut col = None;
            let mut rows = 0;
            for y in 0..16 {
                for x in 0..16 {
                    if mask.get(x, y) {
                        rows += 1;
                        match col {
                            None => col = Some(x),
                            Some(c) => assert_eq!(c, x, "{name}: multiple columns"),
                        }
                    }
                }
            }
            let c = col.expect("step must produce edges");
            assert!(c == 7 || c == 8, "{name}: line at the step, got {c}");
            assert_eq!(rows, 14, "{name}: full interior height");
        }
    }

    #[test]
    fn random_images_match_reference() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let data: Vec<u8> = (0..32 * 32).map(|_| rng.random()).collect();
            let img = GrayImage::new(32, 32, data).unwrap();
            let (edges, _) = canny(&img, 1.4, 50.0, 150.0).unwrap();
            let reference = oracle::canny_reference(&img, 1.4, 50.0, 150.0);
            assert_eq!(edges, reference, "trial {trial}");
        }
    }
}
