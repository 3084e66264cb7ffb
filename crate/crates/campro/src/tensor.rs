//! Dense C×H×W tensors for the embedding-fusion arithmetic.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("tensor data length {len} does not match {channels}x{height}x{width}")]
    BadLength {
        channels: usize,
        height: usize,
        width: usize,
        len: usize,
    },
    #[error("tensor dimensions {channels}x{height}x{width} are degenerate")]
    BadDimensions {
        channels: usize,
        height: usize,
        width: usize,
    },
    #[error("tensor contains a non-finite value at flat index {0}")]
    NonFinite(usize),
}

/// Row-major C×H×W real tensor; channel-major layout, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(
        channels: usize,
        height: usize,
        width: usize,
        data: Vec<f64>,
    ) -> Result<Self, TensorError> {
        if height == 0 || width == 0 {
            return Err(TensorError::BadDimensions {
                channels,
                height,
                width,
            });
        }
        if data.len() != channels * height * width {
            return Err(TensorError::BadLength {
                channels,
                height,
                width,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite(i));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
            .expect("zeros are finite")
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, data).expect("finite generator")
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// (C, H, W)
    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// One channel as a contiguous H·W slice.
    #[inline]
    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    /// Copy channels [from, to) into a new tensor.
    pub fn slice_channels(&self, from: usize, to: usize) -> Tensor3 {
        assert!(from <= to && to <= self.channels, "channel range");
        let plane = self.height * self.width;
        Tensor3 {
            channels: to - from,
            height: self.height,
            width: self.width,
            data: self.data[from * plane..to * plane].to_vec(),
        }
    }
}
