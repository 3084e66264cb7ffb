//! Prompt generation and evaluation machinery for camouflaged-object
//! segmentation pipelines built around a promptable mask decoder.
//!
//! The crate covers the parts of such a pipeline that run *outside* the
//! neural backbone:
//!
//! - [`raster`] – grayscale/bitmask primitives: morphology, Canny edges,
//!   Gaussian blur, exact Euclidean distance transforms, resampling.
//! - [`boundary`] – gradient-boundary prompts from ground-truth masks
//!   (dilate/subtract/dilate/canny product), box prompts, and the
//!   histogram-mode thresholded boundary used at inference time.
//! - [`wavelet`] – single-level 2-D Haar decomposition with subband
//!   selection and the diagonal high-frequency extraction.
//! - [`fusion`] – the dense-embedding fusion arithmetic (channel concat,
//!   pointwise convolution, conv/norm/rectifier block, residual concat)
//!   at desk scale with deterministic seeded weights.
//! - [`metrics`] – the evaluation suite: structure measure, weighted
//!   F-measure, mean enhanced-alignment measure, MAE, Dice and IoU, with
//!   per-image and aggregate reporting.
//! - [`cache`] – bit-exact NPY v1.0 array persistence with
//!   config-fingerprinted keys for precompute-and-store workflows.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! after construction and safe to share across threads.

pub mod boundary;
pub mod cache;
pub mod fusion;
pub mod metrics;
pub mod raster;
pub mod tensor;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;
pub mod wavelet;

pub use tensor::Tensor3;
