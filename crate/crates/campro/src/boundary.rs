//! Prompt construction: gradient-boundary masks from ground truth, box
//! prompts, and the histogram-thresholded boundary generated at inference
//! time from an external edge map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{
    canny_with, dilate, histogram, mask_subtract, BinaryMask, CannyParams, FloatMap, GrayImage,
    Kernel, RasterError,
};

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("dilation pair ({d1}, {d2}) shrinks outward: inner kernel must not exceed outer")]
    ShrinkingPair { d1: usize, d2: usize },
    #[error("empty target: the ground-truth mask has no set pixels")]
    EmptyTarget,
    #[error("empty histogram: no pixels counted")]
    EmptyHistogram,
    #[error("box ({x0},{y0})-({x1},{y1}) exceeds the {width}x{height} frame")]
    BoxOutOfBounds {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        width: usize,
        height: usize,
    },
}

/// Inner/outer dilation kernels of the boundary-band construction.
///
/// The inner kernel thickens the mask before subtraction; the outer kernel
/// widens the resulting band. The published grid never shrinks outward,
/// so `d1 <= d2` is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DilatePair {
    d1: Kernel,
    d2: Kernel,
}

impl DilatePair {
    pub fn new(d1: Kernel, d2: Kernel) -> Result<Self, BoundaryError> {
        if d1.size() > d2.size() {
            return Err(BoundaryError::ShrinkingPair {
                d1: d1.size(),
                d2: d2.size(),
            });
        }
        Ok(Self { d1, d2 })
    }

    pub fn from_sizes(d1: usize, d2: usize) -> Result<Self, BoundaryError> {
        Ok(Self::new(Kernel::new(d1)?, Kernel::new(d2)?)?)
    }

    #[inline]
    pub fn inner(&self) -> Kernel {
        self.d1
    }

    #[inline]
    pub fn outer(&self) -> Kernel {
        self.d2
    }

    /// The published ablation grid D1..D5.
    pub const ABLATION_GRID: [(usize, usize); 5] = [(3, 3), (3, 5), (5, 5), (5, 7), (7, 7)];
}

impl Default for DilatePair {
    /// The adopted setting: inner 3, outer 5.
    fn default() -> Self {
        Self::from_sizes(3, 5).expect("static sizes are valid")
    }
}

/// Whether the boundary band multiplies the binary edge mask or the edge
/// mask weighted by gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EgemMode {
    #[default]
    Binary,
    Magnitude,
}

impl std::fmt::Display for EgemMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EgemMode::Binary => write!(f, "binary"),
            EgemMode::Magnitude => write!(f, "magnitude"),
        }
    }
}

impl std::str::FromStr for EgemMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(EgemMode::Binary),
            "magnitude" => Ok(EgemMode::Magnitude),
            other => Err(format!("unknown mode {other:?} (binary|magnitude)")),
        }
    }
}

/// Gradient-boundary prompt from a ground-truth mask and its image.
///
/// The band is `dilate(dilate(gt, d1) − gt, d2)`; it is then multiplied by
/// the Canny edge mask of the image (binary mode), optionally weighted by
/// the normalized gradient magnitude (magnitude mode).
pub fn egem(
    gt: &BinaryMask,
    img: &GrayImage,
    pair: DilatePair,
    mode: EgemMode,
) -> Result<FloatMap, BoundaryError> {
    egem_with(gt, img, pair, mode, &CannyParams::default())
}

/// [`egem`] with explicit Canny parameters.
pub fn egem_with(
    gt: &BinaryMask,
    img: &GrayImage,
    pair: DilatePair,
    mode: EgemMode,
    canny: &CannyParams,
) -> Result<FloatMap, BoundaryError> {
    if gt.width() != img.width() || gt.height() != img.height() {
        return Err(RasterError::ShapeMismatch {
            expected_w: gt.width(),
            expected_h: gt.height(),
            actual_w: img.width(),
            actual_h: img.height(),
        }
        .into());
    }
    let thick = dilate(gt, pair.inner());
    let rim = mask_subtract(&thick, gt)?;
    let band = dilate(&rim, pair.outer());
    let (edges, magnitude) = canny_with(img, canny)?;

    let data = band
        .data()
        .iter()
        .zip(edges.data().iter())
        .zip(magnitude.data().iter())
        .map(|((&in_band, &edge), &mag)| {
            if !(in_band && edge) {
                0.0
            } else {
                match mode {
                    EgemMode::Binary => 1.0,
                    EgemMode::Magnitude => mag,
                }
            }
        })
        .collect();
    Ok(FloatMap::new(gt.width(), gt.height(), data)?)
}

/// Tight bounding box of the set pixels, grown by `jitter` on each side
/// and clamped to the frame.
pub fn extract_box(gt: &BinaryMask, jitter: usize) -> Result<BoundingBox, BoundaryError> {
    let (w, h) = (gt.width(), gt.height());
    let mut x0 = usize::MAX;
    let mut y0 = usize::MAX;
    let mut x1 = 0usize;
    let mut y1 = 0usize;
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if !any {
        return Err(BoundaryError::EmptyTarget);
    }
    BoundingBox::new(
        x0.saturating_sub(jitter),
        y0.saturating_sub(jitter),
        (x1 + jitter).min(w - 1),
        (y1 + jitter).min(h - 1),
        w,
        h,
    )
    .map_err(|e| match e {
        BoundingBoxError::OutOfBounds {
            x0,
            y0,
            x1,
            y1,
            width,
            height,
        } => BoundaryError::BoxOutOfBounds {
            x0,
            y0,
            x1,
            y1,
            width,
            height,
        },
    })
}

/// Histogram bin with the largest count; ties go to the lowest intensity.
pub fn dominant_value(counts: &[u64; 256]) -> Result<u8, BoundaryError> {
    if counts.iter().all(|&c| c == 0) {
        return Err(BoundaryError::EmptyHistogram);
    }
    let mut best = 0usize;
    for (v, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = v;
        }
    }
    Ok(best as u8)
}

/// Binarization rule for the generated boundary: the dominant (background)
/// intensity plus a fixed offset. Only strictly brighter pixels pass, so
/// the background bin itself never does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    /// The dominant intensity of the edge map this spec was resolved for.
    pub beta: u8,
    pub offset: i32,
}

impl ThresholdSpec {
    pub const DEFAULT_OFFSET: i32 = 15;

    /// The published offset grid.
    pub const OFFSET_GRID: [i32; 5] = [5, 10, 15, 20, 25];

    /// Resolve the dominant intensity from an edge map's histogram.
    pub fn resolve(edge_map: &GrayImage, offset: i32) -> Result<Self, BoundaryError> {
        let beta = dominant_value(&histogram(edge_map))?;
        Ok(Self { beta, offset })
    }

    /// Clamped binarization threshold.
    pub fn threshold(&self) -> u8 {
        (i32::from(self.beta) + self.offset).clamp(0, 255) as u8
    }
}

/// Inference-time boundary: binarize `edge_map` strictly above the
/// resolved threshold, zero everything outside `bbox`, then weight by
/// `gradient` pointwise.
pub fn generate_inference_boundary(
    edge_map: &GrayImage,
    bbox: &BoundingBox,
    gradient: &FloatMap,
    spec: &ThresholdSpec,
) -> Result<FloatMap, BoundaryError> {
    if edge_map.width() != gradient.width() || edge_map.height() != gradient.height() {
        return Err(RasterError::ShapeMismatch {
            expected_w: edge_map.width(),
            expected_h: edge_map.height(),
            actual_w: gradient.width(),
            actual_h: gradient.height(),
        }
        .into());
    }
    if bbox.x1() >= edge_map.width() || bbox.y1() >= edge_map.height() {
        return Err(BoundaryError::BoxOutOfBounds {
            x0: bbox.x0(),
            y0: bbox.y0(),
            x1: bbox.x1(),
            y1: bbox.y1(),
            width: edge_map.width(),
            height: edge_map.height(),
        });
    }
    let cut = spec.threshold();
    let out = FloatMap::from_fn(edge_map.width(), edge_map.height(), |x, y| {
        if !bbox.contains(x, y) {
            return 0.0;
        }
        if edge_map.get(x, y) > cut {
            gradient.get(x, y)
        } else {
            0.0
        }
    });
    Ok(out)
}

pub use bbox::{BoundingBox, BoundingBoxError};

mod bbox {
    use thiserror::Error;

    #[derive(Debug, Error, PartialEq)]
    pub enum BoundingBoxError {
        #[error("box ({x0},{y0})-({x1},{y1}) out of bounds for {width}x{height}")]
        OutOfBounds {
            x0: usize,
            y0: usize,
            x1: usize,
            y1: usize,
            width: usize,
            height: usize,
        },
    }

    /// Axis-aligned box with inclusive corners, tied to an image frame.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
    pub struct BoundingBox {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
    }

    impl BoundingBox {
        pub fn new(
            x0: usize,
            y0: usize,
            x1: usize,
            y1: usize,
            width: usize,
            height: usize,
        ) -> Result<Self, BoundingBoxError> {
            if x0 > x1 || y0 > y1 || x1 >= width || y1 >= height {
                return Err(BoundingBoxError::OutOfBounds {
                    x0,
                    y0,
                    x1,
                    y1,
                    width,
                    height,
                });
            }
            Ok(Self { x0, y0, x1, y1 })
        }

        #[inline]
        pub fn x0(&self) -> usize {
            self.x0
        }

        #[inline]
        pub fn y0(&self) -> usize {
            self.y0
        }

        #[inline]
        pub fn x1(&self) -> usize {
            self.x1
        }

        #[inline]
        pub fn y1(&self) -> usize {
            self.y1
        }

        #[inline]
        pub fn contains(&self, x: usize, y: usize) -> bool {
            x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
        }

        /// The four corner coordinates as (x0, y0, x1, y1).
        pub fn corners(&self) -> (usize, usize, usize, usize) {
            (self.x0, self.y0, self.x1, self.y1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{canny, dilate, mask_subtract, Kernel};
    use rand::{Rng, SeedableRng};

    fn bright_square_scene() -> (BinaryMask, GrayImage) {
        let gt = BinaryMask::from_fn(16, 16, |x, y| (6..10).contains(&x) && (6..10).contains(&y));
        let img = GrayImage::from_fn(16, 16, |x, y| {
            if (6..10).contains(&x) && (6..10).contains(&y) {
                220
            } else {
                30
            }
        });
        (gt, img)
    }

    #[test]
    fn full_mask_yields_zero_prompt() {
        let gt = BinaryMask::from_fn(12, 12, |_, _| true);
        let img = GrayImage::from_fn(12, 12, |x, _| (x * 20) as u8);
        let out = egem(&gt, &img, DilatePair::default(), EgemMode::Binary).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_mask_yields_zero_prompt() {
        let gt = BinaryMask::zeros(12, 12);
        let img = GrayImage::from_fn(12, 12, |x, _| (x * 20) as u8);
        let out = egem(&gt, &img, DilatePair::default(), EgemMode::Binary).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn egem_matches_step_by_step_composition() {
        let (gt, img) = bright_square_scene();
        let pair = DilatePair::from_sizes(3, 5).unwrap();
        let p = CannyParams::default();

        let out = egem(&gt, &img, pair, EgemMode::Binary).unwrap();

        // Independent composition of the four primitives.
        let band = dilate(
            &mask_subtract(&dilate(&gt, Kernel::new(3).unwrap()), &gt).unwrap(),
            Kernel::new(5).unwrap(),
        );
        let (edges, _) = canny(&img, p.sigma, p.low, p.high).unwrap();
        let mut nonzero = 0;
        for y in 0..16 {
            for x in 0..16 {
                let expected = if band.get(x, y) && edges.get(x, y) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(out.get(x, y), expected, "at ({x},{y})");
                if expected > 0.0 {
                    nonzero += 1;
                }
            }
        }
        assert!(nonzero > 0, "scene must excite the band");
    }

    #[test]
    fn magnitude_mode_weights_by_gradient() {
        let (gt, img) = bright_square_scene();
        let pair = DilatePair::default();
        let p = CannyParams::default();
        let out = egem(&gt, &img, pair, EgemMode::Magnitude).unwrap();
        let (_, magnitude) = canny(&img, p.sigma, p.low, p.high).unwrap();
        let binary = egem(&gt, &img, pair, EgemMode::Binary).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                let expected = binary.get(x, y) * magnitude.get(x, y);
                assert_eq!(out.get(x, y), expected);
            }
        }
    }

    #[test]
    fn egem_support_stays_within_band_and_grows_with_kernels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let cx = rng.random_range(4..12);
            let cy = rng.random_range(4..12);
            let gt = BinaryMask::from_fn(16, 16, |x, y| {
                x.abs_diff(cx) <= 2 && y.abs_diff(cy) <= 2
            });
            let img = GrayImage::from_fn(16, 16, |x, y| {
                if gt.get(x, y) {
                    200
                } else {
                    20
                }
            });
            let narrow = egem(&gt, &img, DilatePair::from_sizes(3, 3).unwrap(), EgemMode::Binary)
                .unwrap();
            let wide = egem(&gt, &img, DilatePair::from_sizes(7, 7).unwrap(), EgemMode::Binary)
                .unwrap();
            let band = dilate(
                &mask_subtract(&dilate(&gt, Kernel::new(3).unwrap()), &gt).unwrap(),
                Kernel::new(3).unwrap(),
            );
            for i in 0..256 {
                if narrow.data()[i] > 0.0 {
                    assert!(band.data()[i], "support escapes the band");
                    assert!(wide.data()[i] > 0.0, "narrow support must be within wide");
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let gt = BinaryMask::zeros(8, 8);
        let img = GrayImage::zeros(9, 8);
        assert!(matches!(
            egem(&gt, &img, DilatePair::default(), EgemMode::Binary),
            Err(BoundaryError::Raster(RasterError::ShapeMismatch { .. }))
        ));
    }

    #[test]
    fn dilate_pair_rejects_shrinking() {
        assert!(matches!(
            DilatePair::from_sizes(5, 3),
            Err(BoundaryError::ShrinkingPair { .. })
        ));
    }

    #[test]
    fn box_of_full_frame() {
        let gt = BinaryMask::from_fn(10, 6, |_, _| true);
        let b = extract_box(&gt, 0).unwrap();
        assert_eq!(b.corners(), (0, 0, 9, 5));
    }

    #[test]
    fn box_of_single_pixel() {
        let gt = BinaryMask::from_fn(10, 10, |x, y| x == 3 && y == 7);
        let b = extract_box(&gt, 0).unwrap();
        assert_eq!(b.corners(), (3, 7, 3, 7));
    }

    #[test]
    fn box_matches_min_max_scan_on_random_blobs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let gt = BinaryMask::from_fn(64, 64, |_, _| rng.random::<f64>() < 0.02);
            if gt.count_set() == 0 {
                continue;
            }
            let b = extract_box(&gt, 0).unwrap();
            let mut x0 = usize::MAX;
            let mut y0 = usize::MAX;
            let (mut x1, mut y1) = (0, 0);
            for y in 0..64 {
                for x in 0..64 {
                    if gt.get(x, y) {
                        x0 = x0.min(x);
                        y0 = y0.min(y);
                        x1 = x1.max(x);
                        y1 = y1.max(y);
                    }
                }
            }
            assert_eq!(b.corners(), (x0, y0, x1, y1));
            // Tightness: every set pixel inside, and each side touches one.
            for y in 0..64 {
                for x in 0..64 {
                    if gt.get(x, y) {
                        assert!(b.contains(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn empty_mask_has_no_box() {
        assert!(matches!(
            extract_box(&BinaryMask::zeros(4, 4), 0),
            Err(BoundaryError::EmptyTarget)
        ));
    }

    #[test]
    fn jitter_expands_and_clamps() {
        let gt = BinaryMask::from_fn(10, 10, |x, y| x == 1 && y == 8);
        let b = extract_box(&gt, 3).unwrap();
        assert_eq!(b.corners(), (0, 5, 4, 9));
    }

    #[test]
    fn dominant_value_picks_spike() {
        let mut counts = [0u64; 256];
        counts[37] = 12;
        assert_eq!(dominant_value(&counts).unwrap(), 37);
    }

    #[test]
    fn dominant_value_breaks_ties_low() {
        let counts = [3u64; 256];
        assert_eq!(dominant_value(&counts).unwrap(), 0);
    }

    #[test]
    fn dominant_value_matches_scan_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let mut counts = [0u64; 256];
            for c in counts.iter_mut() {
                *c = rng.random_range(0..50);
            }
            counts[rng.random_range(0..256)] += 1; // guarantee nonempty
            let got = dominant_value(&counts).unwrap();
            let mut best = 0usize;
            for v in 0..256 {
                if counts[v] > counts[best] {
                    best = v;
                }
            }
            assert_eq!(got, best as u8);
            assert!(counts.iter().all(|&c| c <= counts[got as usize]));
        }
    }

    #[test]
    fn constant_edge_map_generates_nothing() {
        let edge = GrayImage::from_fn(12, 12, |_, _| 37);
        let bbox = BoundingBox::new(0, 0, 11, 11, 12, 12).unwrap();
        let gradient = FloatMap::constant(12, 12, 1.0);
        let spec = ThresholdSpec::resolve(&edge, 15).unwrap();
        assert_eq!(spec.beta, 37);
        assert_eq!(spec.threshold(), 52);
        let out = generate_inference_boundary(&edge, &bbox, &gradient, &spec).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ridge_inside_box_survives_thresholding() {
        // Background 10, bright ridge at x=6 rows 2..10.
        let edge = GrayImage::from_fn(16, 16, |x, y| {
            if x == 6 && (2..10).contains(&y) {
                200
            } else {
                10
            }
        });
        let bbox = BoundingBox::new(4, 1, 9, 11, 16, 16).unwrap();
        let ones = FloatMap::constant(16, 16, 1.0);
        let spec = ThresholdSpec::resolve(&edge, 15).unwrap();
        assert_eq!(spec.threshold(), 25); // mode 10 + 15
        let out = generate_inference_boundary(&edge, &bbox, &ones, &spec).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                let expected = if x == 6 && (2..10).contains(&y) { 1.0 } else { 0.0 };
                assert_eq!(out.get(x, y), expected, "at ({x},{y})");
            }
        }

        // A box that excludes the ridge kills everything.
        let away = BoundingBox::new(10, 10, 15, 15, 16, 16).unwrap();
        let silent = generate_inference_boundary(&edge, &away, &ones, &spec).unwrap();
        assert!(silent.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn boundary_generation_is_idempotent_under_box_masking() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let edge = GrayImage::from_fn(12, 12, |_, _| rng.random());
            let gradient = FloatMap::from_fn(12, 12, |_, _| rng.random());
            let bbox = BoundingBox::new(2, 3, 8, 9, 12, 12).unwrap();
            let spec = ThresholdSpec::resolve(&edge, 15).unwrap();
            let out = generate_inference_boundary(&edge, &bbox, &gradient, &spec).unwrap();
            // Zero outside the box.
            for y in 0..12 {
                for x in 0..12 {
                    if !bbox.contains(x, y) {
                        assert_eq!(out.get(x, y), 0.0);
                    }
                }
            }
            // Re-masking by the same box changes nothing.
            let remasked = FloatMap::from_fn(12, 12, |x, y| {
                if bbox.contains(x, y) {
                    out.get(x, y)
                } else {
                    0.0
                }
            });
            assert_eq!(remasked, out);
        }
    }
}
