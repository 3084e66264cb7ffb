//! Separable Gaussian filtering.

use super::{FloatMap, RasterError};

/// Normalized 1-D Gaussian taps for an odd `ksize`.
pub(crate) fn gaussian_kernel(ksize: usize, sigma: f64) -> Vec<f64> {
    let r = (ksize / 2) as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Convolve rows then columns with replicated borders.
pub(crate) fn separable_filter(
    data: &[f64],
    width: usize,
    height: usize,
    taps: &[f64],
) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let clamp_w = |i: isize| i.clamp(0, width as isize - 1) as usize;
    let clamp_h = |i: isize| i.clamp(0, height as isize - 1) as usize;

    let mut rows = vec![0.0; width * height];
    for y in 0..height {
        let src = &data[y * width..(y + 1) * width];
        let dst = &mut rows[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (j, t) in taps.iter().enumerate() {
                acc += t * src[clamp_w(x as isize + j as isize - r)];
            }
            dst[x] = acc;
        }
    }

    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (j, t) in taps.iter().enumerate() {
                acc += t * rows[clamp_h(y as isize + j as isize - r) * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Gaussian blur with an odd k×k footprint and replicated borders.
///
/// Replication keeps constants constant, so blurring never drags mask
/// interiors toward zero at the frame.
pub fn gaussian_blur(map: &FloatMap, ksize: usize, sigma: f64) -> Result<FloatMap, RasterError> {
    if ksize == 0 || ksize % 2 == 0 {
        return Err(RasterError::InvalidKernel(ksize));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(RasterError::InvalidSigma(sigma));
    }
    let taps = gaussian_kernel(ksize, sigma);
    let out = separable_filter(map.data(), map.width(), map.height(), &taps);
    // Weights are a convex combination of in-range samples, so the result
    // stays in [0,1] up to rounding.
    let out = out.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    FloatMap::new(map.width(), map.height(), out)
}
