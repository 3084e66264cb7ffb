//! Dense-embedding fusion arithmetic at desk scale.
//!
//! Two pointwise-convolution stages stitch the box and boundary embeddings
//! together: the concatenated pair is mixed down to the embedding width,
//! refined by a conv/norm/rectifier block, and re-concatenated with the
//! unrefined mix as a residual. The diagonal high-frequency tensor then
//! joins the result and a second pointwise convolution produces the final
//! dense embedding. Everything runs in inference mode with fixed weights;
//! no training machinery lives here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tensor::Tensor3;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("{stage}: expected {expected} channels, got {actual}")]
    ChannelMismatch {
        stage: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{stage}: spatial dims {a_h}x{a_w} vs {b_h}x{b_w} differ")]
    SpatialMismatch {
        stage: &'static str,
        a_h: usize,
        a_w: usize,
        b_h: usize,
        b_w: usize,
    },
    #[error("{stage}: weight count {got} does not match {rows}x{cols}")]
    BadWeights {
        stage: &'static str,
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("{stage}: normalization variance + epsilon must be positive (channel {channel})")]
    BadVariance { stage: &'static str, channel: usize },
}

/// 1×1 convolution: a Cout×Cin mixing matrix plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseConv {
    in_channels: usize,
    out_channels: usize,
    weights: Vec<f64>, // row-major Cout×Cin
    bias: Vec<f64>,
}

impl PointwiseConv {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, FusionError> {
        if weights.len() != in_channels * out_channels {
            return Err(FusionError::BadWeights {
                stage: "pointwise",
                rows: out_channels,
                cols: in_channels,
                got: weights.len(),
            });
        }
        if bias.len() != out_channels {
            return Err(FusionError::BadWeights {
                stage: "pointwise bias",
                rows: out_channels,
                cols: 1,
                got: bias.len(),
            });
        }
        Ok(Self {
            in_channels,
            out_channels,
            weights,
            bias,
        })
    }

    /// Identity mixing (Cout = Cin, unit diagonal, zero bias).
    pub fn identity(channels: usize) -> Self {
        let mut weights = vec![0.0; channels * channels];
        for c in 0..channels {
            weights[c * channels + c] = 1.0;
        }
        Self::new(channels, channels, weights, vec![0.0; channels]).expect("square identity")
    }

    #[inline]
    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    #[inline]
    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    #[inline]
    pub fn weight(&self, out: usize, input: usize) -> f64 {
        self.weights[out * self.in_channels + input]
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }
}

/// 3×3 same-padding convolution weights: Cout×Cin×3×3 plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv3x3 {
    in_channels: usize,
    out_channels: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Conv3x3 {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, FusionError> {
        if weights.len() != out_channels * in_channels * 9 {
            return Err(FusionError::BadWeights {
                stage: "conv3x3",
                rows: out_channels,
                cols: in_channels * 9,
                got: weights.len(),
            });
        }
        if bias.len() != out_channels {
            return Err(FusionError::BadWeights {
                stage: "conv3x3 bias",
                rows: out_channels,
                cols: 1,
                got: bias.len(),
            });
        }
        Ok(Self {
            in_channels,
            out_channels,
            weights,
            bias,
        })
    }

    /// Center-tap identity: passes each channel through unchanged.
    pub fn identity(channels: usize) -> Self {
        let mut weights = vec![0.0; channels * channels * 9];
        for c in 0..channels {
            weights[(c * channels + c) * 9 + 4] = 1.0; // center tap
        }
        Self::new(channels, channels, weights, vec![0.0; channels]).expect("square identity")
    }

    #[inline]
    fn tap(&self, out: usize, input: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((out * self.in_channels + input) * 3 + ky) * 3 + kx]
    }
}

/// Per-channel affine normalization with fixed running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub epsilon: f64,
}

impl BatchNorm {
    pub fn identity(channels: usize) -> Self {
        Self {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            mean: vec![0.0; channels],
            var: vec![1.0; channels],
            epsilon: 0.0,
        }
    }
}

/// Convolution → normalization → rectifier.
#[derive(Debug, Clone, PartialEq)]
pub struct CbrBlock {
    pub conv: Conv3x3,
    pub bn: BatchNorm,
}

impl CbrBlock {
    /// Block that reproduces nonnegative inputs exactly.
    pub fn identity(channels: usize) -> Self {
        Self {
            conv: Conv3x3::identity(channels),
            bn: BatchNorm::identity(channels),
        }
    }

    fn validate(&self) -> Result<(), FusionError> {
        let c = self.conv.out_channels;
        for v in [&self.bn.gamma, &self.bn.beta, &self.bn.mean, &self.bn.var] {
            if v.len() != c {
                return Err(FusionError::BadWeights {
                    stage: "norm",
                    rows: c,
                    cols: 1,
                    got: v.len(),
                });
            }
        }
        for (channel, &var) in self.bn.var.iter().enumerate() {
            if var + self.bn.epsilon <= 0.0 {
                return Err(FusionError::BadVariance {
                    stage: "norm",
                    channel,
                });
            }
        }
        Ok(())
    }
}

fn check_spatial(stage: &'static str, a: &Tensor3, b: &Tensor3) -> Result<(), FusionError> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(FusionError::SpatialMismatch {
            stage,
            a_h: a.height(),
            a_w: a.width(),
            b_h: b.height(),
            b_w: b.width(),
        });
    }
    Ok(())
}

/// Join along the channel dimension, `a`'s channels first.
pub fn concat_channels(a: &Tensor3, b: &Tensor3) -> Result<Tensor3, FusionError> {
    check_spatial("concat", a, b)?;
    let mut data = Vec::with_capacity((a.channels() + b.channels()) * a.height() * a.width());
    data.extend_from_slice(a.data());
    data.extend_from_slice(b.data());
    Ok(
        Tensor3::new(a.channels() + b.channels(), a.height(), a.width(), data)
            .expect("inputs are finite"),
    )
}

/// Apply a 1×1 convolution: per pixel, a Cout×Cin matrix times the channel
/// vector plus bias.
pub fn pointwise_conv(t: &Tensor3, pc: &PointwiseConv) -> Result<Tensor3, FusionError> {
    if t.channels() != pc.in_channels {
        return Err(FusionError::ChannelMismatch {
            stage: "pointwise",
            expected: pc.in_channels,
            actual: t.channels(),
        });
    }
    let plane = t.height() * t.width();
    let mut data = vec![0.0; pc.out_channels * plane];
    for o in 0..pc.out_channels {
        let dst = &mut data[o * plane..(o + 1) * plane];
        for v in dst.iter_mut() {
            *v = pc.bias[o];
        }
        for i in 0..pc.in_channels {
            let w = pc.weight(o, i);
            if w == 0.0 {
                continue;
            }
            let src = t.channel(i);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += w * s;
            }
        }
    }
    Ok(Tensor3::new(pc.out_channels, t.height(), t.width(), data)
        .expect("finite weights on finite input"))
}

/// 3×3 same-padding convolution, then per-channel normalization with the
/// block's fixed statistics, then `max(0, ·)`.
pub fn cbr(t: &Tensor3, blk: &CbrBlock) -> Result<Tensor3, FusionError> {
    if t.channels() != blk.conv.in_channels {
        return Err(FusionError::ChannelMismatch {
            stage: "cbr conv",
            expected: blk.conv.in_channels,
            actual: t.channels(),
        });
    }
    blk.validate()?;
    let (h, w) = (t.height(), t.width());
    let plane = h * w;
    let mut data = vec![0.0; blk.conv.out_channels * plane];
    for o in 0..blk.conv.out_channels {
        let scale = blk.bn.gamma[o] / (blk.bn.var[o] + blk.bn.epsilon).sqrt();
        let shift = blk.bn.beta[o];
        let mean = blk.bn.mean[o];
        let dst = &mut data[o * plane..(o + 1) * plane];
        for y in 0..h {
            for x in 0..w {
                let mut acc = blk.conv.bias[o];
                for i in 0..blk.conv.in_channels {
                    let src = t.channel(i);
                    for ky in 0..3usize {
                        let sy = y as isize + ky as isize - 1;
                        if sy < 0 || sy >= h as isize {
                            continue; // zero padding
                        }
                        for kx in 0..3usize {
                            let sx = x as isize + kx as isize - 1;
                            if sx < 0 || sx >= w as isize {
                                continue;
                            }
                            acc += blk.conv.tap(o, i, ky, kx) * src[sy as usize * w + sx as usize];
                        }
                    }
                }
                let normed = (acc - mean) * scale + shift;
                dst[y * w + x] = normed.max(0.0);
            }
        }
    }
    Ok(Tensor3::new(blk.conv.out_channels, h, w, data).expect("finite arithmetic"))
}

/// Fuse the box and boundary embeddings.
///
/// `EM = pointwise(concat(e_box, e_boundary), dc1)` followed by the
/// residual concatenation `concat(cbr(EM), EM)`. The output has twice the
/// embedding channel count and its upper half is EM bit-for-bit.
pub fn bbmg_forward(
    e_box: &Tensor3,
    e_boundary: &Tensor3,
    dc1: &PointwiseConv,
    blk: &CbrBlock,
) -> Result<Tensor3, FusionError> {
    check_spatial("bbmg concat", e_box, e_boundary)?;
    if e_box.channels() != e_boundary.channels() {
        return Err(FusionError::ChannelMismatch {
            stage: "bbmg concat",
            expected: e_box.channels(),
            actual: e_boundary.channels(),
        });
    }
    let joined = concat_channels(e_box, e_boundary)?;
    if dc1.in_channels != joined.channels() {
        return Err(FusionError::ChannelMismatch {
            stage: "bbmg mix",
            expected: joined.channels(),
            actual: dc1.in_channels,
        });
    }
    let em = pointwise_conv(&joined, dc1)?;
    if blk.conv.in_channels != em.channels() || blk.conv.out_channels != em.channels() {
        return Err(FusionError::ChannelMismatch {
            stage: "bbmg refine",
            expected: em.channels(),
            actual: blk.conv.in_channels,
        });
    }
    let refined = cbr(&em, blk)?;
    concat_channels(&refined, &em)
}

/// Join the high-frequency tensor with the fused embedding and mix down.
pub fn ode_forward(
    hf: &Tensor3,
    obb: &Tensor3,
    dc2: &PointwiseConv,
) -> Result<Tensor3, FusionError> {
    check_spatial("ode concat", hf, obb)?;
    let joined = concat_channels(hf, obb)?;
    if dc2.in_channels != joined.channels() {
        return Err(FusionError::ChannelMismatch {
            stage: "ode mix",
            expected: joined.channels(),
            actual: dc2.in_channels,
        });
    }
    pointwise_conv(&joined, dc2)
}

/// Deterministic seeded weights and inputs for tests and smoke runs.
pub mod synthetic {
    use super::*;

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        rng.random::<f64>() - 0.5
    }

    pub fn tensor(channels: usize, height: usize, width: usize, seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..channels * height * width)
            .map(|_| uniform(&mut rng))
            .collect();
        Tensor3::new(channels, height, width, data).expect("uniform values are finite")
    }

    pub fn pointwise(in_channels: usize, out_channels: usize, seed: u64) -> PointwiseConv {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..in_channels * out_channels)
            .map(|_| uniform(&mut rng))
            .collect();
        let bias = (0..out_channels).map(|_| uniform(&mut rng)).collect();
        PointwiseConv::new(in_channels, out_channels, weights, bias).expect("sized by construction")
    }

    pub fn cbr_block(channels: usize, seed: u64) -> CbrBlock {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..channels * channels * 9)
            .map(|_| uniform(&mut rng))
            .collect();
        let bias = (0..channels).map(|_| uniform(&mut rng)).collect();
        let conv = Conv3x3::new(channels, channels, weights, bias).expect("sized by construction");
        let bn = BatchNorm {
            gamma: (0..channels).map(|_| 0.5 + rng.random::<f64>()).collect(),
            beta: (0..channels).map(|_| uniform(&mut rng)).collect(),
            mean: (0..channels).map(|_| uniform(&mut rng)).collect(),
            var: (0..channels).map(|_| 0.25 + rng.random::<f64>()).collect(),
            epsilon: 1e-5,
        };
        CbrBlock { conv, bn }
    }
}
