//! Raster primitives shared by the prompt and metric pipelines.
//!
//! All types are plain row-major buffers with validated dimensions. The
//! operations are pure: they never mutate their inputs and are safe to
//! fan out across threads.

mod distance;
mod edges;
mod filter;
pub mod io;
mod morphology;
mod sample;

pub use distance::{distance_transform, nearest_foreground, DistanceMap, UNREACHABLE};
pub use edges::{canny, canny_with, CannyParams};
pub use filter::gaussian_blur;
pub use morphology::{dilate, mask_subtract};
pub use sample::{histogram, resize_bilinear, truncate_normalize};

use thiserror::Error;

/// Errors from raster primitives.
#[derive(Debug, Error, PartialEq)]
pub enum RasterError {
    #[error("shape mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    ShapeMismatch {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },
    #[error("invalid kernel size {0}: must be odd and >= 1")]
    InvalidKernel(usize),
    #[error("invalid thresholds: low {low} must not exceed high {high}")]
    InvalidThreshold { low: f64, high: f64 },
    #[error("invalid percentile range [{lo}, {hi}]: need 0 <= lo < hi <= 100")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("invalid raster dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("buffer length {len} does not match {width}x{height}")]
    BadLength {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("invalid sigma {0}: must be positive and finite")]
    InvalidSigma(f64),
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::BadDimensions { width, height });
    }
    Ok(())
}

macro_rules! same_shape {
    ($a:expr, $b:expr) => {
        if $a.width() != $b.width() || $a.height() != $b.height() {
            return Err(RasterError::ShapeMismatch {
                expected_w: $a.width(),
                expected_h: $a.height(),
                actual_w: $b.width(),
                actual_h: $b.height(),
            });
        }
    };
}
pub(crate) use same_shape;

/// Single-channel 8-bit raster, row-major.
///
/// Carrier for input images, ground-truth renderings, and edge maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(RasterError::BadLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// All-zero image.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0; width * height]).expect("nonzero dims")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("nonzero dims")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Interpret as a mask: nonzero intensity is foreground.
    pub fn to_mask(&self, threshold: u8) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v > threshold).collect(),
        }
    }

    /// Map intensities to [0,1] by dividing by 255.
    pub fn to_float(&self) -> FloatMap {
        FloatMap {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f64::from(v) / 255.0).collect(),
        }
    }
}

/// Row-major boolean mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self, RasterError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(RasterError::BadLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height]).expect("nonzero dims")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("nonzero dims")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count_set(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// True if every set pixel of `self` is also set in `other`.
    pub fn subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(&a, &b)| !a || b)
    }

    pub fn to_float(&self) -> FloatMap {
        FloatMap {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Row-major real-valued raster with entries in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatMap {
    /// Build from raw data; every entry must already lie in [0,1].
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, RasterError> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(RasterError::BadLength {
                width,
                height,
                len: data.len(),
            });
        }
        debug_assert!(
            data.iter().all(|v| (0.0..=1.0).contains(v)),
            "FloatMap entries must lie in [0,1]"
        );
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0.0; width * height]).expect("nonzero dims")
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("nonzero dims")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("nonzero dims")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Quantize to 8 bits (round-half-away, clamped).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }
}

/// Odd-sided square structuring element / filter footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Kernel(usize);

impl Kernel {
    pub fn new(size: usize) -> Result<Self, RasterError> {
        if size == 0 || size % 2 == 0 {
            return Err(RasterError::InvalidKernel(size));
        }
        Ok(Self(size))
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.0
    }

    /// Half-width of the footprint.
    #[inline]
    pub fn radius(&self) -> usize {
        self.0 / 2
    }
}
