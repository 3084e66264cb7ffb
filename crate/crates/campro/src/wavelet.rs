//! Single-level 2-D Haar decomposition.
//!
//! Each non-overlapping 2×2 block `[[x1, x2], [x3, x4]]` maps to four
//! half-resolution planes under the averaging normalization:
//!
//! ```text
//! LL = (x1 + x2 + x3 + x4) / 4      LH = (x1 - x2 + x3 - x4) / 4
//! HL = (x1 + x2 - x3 - x4) / 4      HH = (x1 - x2 - x3 + x4) / 4
//! ```
//!
//! so the LL of a constant plane is that constant and HH isolates the
//! diagonal difference. Odd dimensions pad by edge replication and the
//! inverse crops back. The fixed 1/4 scale is absorbed downstream by the
//! pointwise convolutions, so no orthonormal variant is needed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::Tensor3;

#[derive(Debug, Error, PartialEq)]
pub enum WaveletError {
    #[error("plane {width}x{height} is too small for a 2x2 block transform")]
    TooSmall { width: usize, height: usize },
    #[error("plane data length {len} does not match {width}x{height}")]
    BadLength {
        width: usize,
        height: usize,
        len: usize,
    },
}

/// Real-valued H×W plane, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, WaveletError> {
        if data.len() != width * height {
            return Err(WaveletError::BadLength {
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

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
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
}

/// Which subband to pull out of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subband {
    LL,
    LH,
    HL,
    HH,
}

impl Subband {
    /// The published comparison grid.
    pub const ALL: [Subband; 4] = [Subband::LL, Subband::LH, Subband::HL, Subband::HH];
}

impl std::fmt::Display for Subband {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Subband::LL => "LL",
            Subband::LH => "LH",
            Subband::HL => "HL",
            Subband::HH => "HH",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Subband {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LL" | "ll" => Ok(Subband::LL),
            "LH" | "lh" => Ok(Subband::LH),
            "HL" | "hl" => Ok(Subband::HL),
            "HH" | "hh" => Ok(Subband::HH),
            other => Err(format!("unknown subband {other:?} (LL|LH|HL|HH)")),
        }
    }
}

/// The four half-resolution subbands of one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Subbands {
    pub ll: Plane,
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
    pub orig_w: usize,
    pub orig_h: usize,
}

impl Subbands {
    pub fn select(&self, which: Subband) -> &Plane {
        match which {
            Subband::LL => &self.ll,
            Subband::LH => &self.lh,
            Subband::HL => &self.hl,
            Subband::HH => &self.hh,
        }
    }
}

/// Forward single-level Haar transform.
pub fn dwt2_haar(plane: &Plane) -> Result<Subbands, WaveletError> {
    let (w, h) = (plane.width(), plane.height());
    if w < 2 || h < 2 {
        return Err(WaveletError::TooSmall {
            width: w,
            height: h,
        });
    }
    let hw = w.div_ceil(2);
    let hh_dim = h.div_ceil(2);
    // Edge replication for odd dimensions.
    let sample = |x: usize, y: usize| plane.get(x.min(w - 1), y.min(h - 1));

    let mut ll = Vec::with_capacity(hw * hh_dim);
    let mut lh = Vec::with_capacity(hw * hh_dim);
    let mut hl = Vec::with_capacity(hw * hh_dim);
    let mut hh = Vec::with_capacity(hw * hh_dim);
    for by in 0..hh_dim {
        for bx in 0..hw {
            let x1 = sample(2 * bx, 2 * by);
            let x2 = sample(2 * bx + 1, 2 * by);
            let x3 = sample(2 * bx, 2 * by + 1);
            let x4 = sample(2 * bx + 1, 2 * by + 1);
            ll.push((x1 + x2 + x3 + x4) / 4.0);
            lh.push((x1 - x2 + x3 - x4) / 4.0);
            hl.push((x1 + x2 - x3 - x4) / 4.0);
            hh.push((x1 - x2 - x3 + x4) / 4.0);
        }
    }
    Ok(Subbands {
        ll: Plane::new(hw, hh_dim, ll)?,
        lh: Plane::new(hw, hh_dim, lh)?,
        hl: Plane::new(hw, hh_dim, hl)?,
        hh: Plane::new(hw, hh_dim, hh)?,
        orig_w: w,
        orig_h: h,
    })
}

/// Exact inverse of [`dwt2_haar`]; replicated padding is cropped away.
pub fn idwt2_haar(sb: &Subbands) -> Plane {
    let (hw, hh_dim) = (sb.ll.width(), sb.ll.height());
    let (w, h) = (sb.orig_w, sb.orig_h);
    let mut data = vec![0.0; w * h];
    for by in 0..hh_dim {
        for bx in 0..hw {
            let ll = sb.ll.get(bx, by);
            let lh = sb.lh.get(bx, by);
            let hl = sb.hl.get(bx, by);
            let hh = sb.hh.get(bx, by);
            let x1 = ll + lh + hl + hh;
            let x2 = ll - lh + hl - hh;
            let x3 = ll + lh - hl - hh;
            let x4 = ll - lh - hl + hh;
            let mut put = |x: usize, y: usize, v: f64| {
                if x < w && y < h {
                    data[y * w + x] = v;
                }
            };
            put(2 * bx, 2 * by, x1);
            put(2 * bx + 1, 2 * by, x2);
            put(2 * bx, 2 * by + 1, x3);
            put(2 * bx + 1, 2 * by + 1, x4);
        }
    }
    Plane {
        width: w,
        height: h,
        data,
    }
}

/// Request a single subband of a decomposition.
pub fn select_subband(sb: &Subbands, which: Subband) -> Plane {
    sb.select(which).clone()
}

/// Per-channel diagonal high-frequency extraction.
///
/// Each channel's HH subband is upsampled back to H×W by nearest neighbor
/// so the result concatenates cleanly with full-resolution embeddings.
pub fn diagonal_hf(t: &Tensor3) -> Result<Tensor3, WaveletError> {
    let (c, h, w) = t.shape();
    if w < 2 || h < 2 {
        return Err(WaveletError::TooSmall {
            width: w,
            height: h,
        });
    }
    let mut data = Vec::with_capacity(c * h * w);
    for ch in 0..c {
        let plane = Plane::new(w, h, t.channel(ch).to_vec())?;
        let sb = dwt2_haar(&plane)?;
        for y in 0..h {
            for x in 0..w {
                data.push(sb.hh.get(x / 2, y / 2));
            }
        }
    }
    Ok(Tensor3::new(c, h, w, data).expect("finite arithmetic on finite input"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_plane(rng: &mut impl Rng, w: usize, h: usize) -> Plane {
        Plane::from_fn(w, h, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn constant_plane_concentrates_in_ll() {
        let p = Plane::from_fn(8, 6, |_, _| 3.25);
        let sb = dwt2_haar(&p).unwrap();
        assert!(sb.ll.data().iter().all(|&v| v == 3.25));
        assert!(sb.lh.data().iter().all(|&v| v == 0.0));
        assert!(sb.hl.data().iter().all(|&v| v == 0.0));
        assert!(sb.hh.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_block_hand_values() {
        let p = Plane::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let sb = dwt2_haar(&p).unwrap();
        assert_eq!(sb.ll.get(0, 0), 2.5);
        assert_eq!(sb.lh.get(0, 0), -0.5);
        assert_eq!(sb.hl.get(0, 0), -1.0);
        assert_eq!(sb.hh.get(0, 0), 0.0);
    }

    #[test]
    fn diagonal_block_excites_only_hh() {
        let p = Plane::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let sb = dwt2_haar(&p).unwrap();
        assert_eq!(sb.hh.get(0, 0), 0.5);
        assert_eq!(sb.lh.get(0, 0), 0.0);
        assert_eq!(sb.hl.get(0, 0), 0.0);
        assert_eq!(sb.ll.get(0, 0), 0.5);
    }

    #[test]
    fn select_subband_returns_requested_plane() {
        let p = Plane::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let sb = dwt2_haar(&p).unwrap();
        assert_eq!(select_subband(&sb, Subband::HL).get(0, 0), -1.0);
        assert_eq!(select_subband(&sb, Subband::LL).get(0, 0), 2.5);
    }

    #[test]
    fn too_small_planes_are_rejected() {
        let p = Plane::new(1, 4, vec![0.0; 4]).unwrap();
        assert!(matches!(dwt2_haar(&p), Err(WaveletError::TooSmall { .. })));
    }

    #[test]
    fn round_trip_even_dims_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let w = 2 * rng.random_range(1..9);
            let h = 2 * rng.random_range(1..9);
            let p = random_plane(&mut rng, w, h);
            let back = idwt2_haar(&dwt2_haar(&p).unwrap());
            for (a, b) in p.data().iter().zip(back.data().iter()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn round_trip_odd_dims_crops_padding() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for (w, h) in [(5, 4), (4, 7), (3, 3), (9, 5)] {
            let p = random_plane(&mut rng, w, h);
            let back = idwt2_haar(&dwt2_haar(&p).unwrap());
            assert_eq!(back.width(), w);
            assert_eq!(back.height(), h);
            for (a, b) in p.data().iter().zip(back.data().iter()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ll_only_subbands_reconstruct_constant() {
        let p = Plane::from_fn(6, 6, |_, _| 1.5);
        let mut sb = dwt2_haar(&p).unwrap();
        sb.lh = Plane::from_fn(3, 3, |_, _| 0.0);
        sb.hl = Plane::from_fn(3, 3, |_, _| 0.0);
        sb.hh = Plane::from_fn(3, 3, |_, _| 0.0);
        let back = idwt2_haar(&sb);
        assert!(back.data().iter().all(|&v| (v - 1.5).abs() < 1e-12));
    }

    #[test]
    fn energy_is_conserved_per_block() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let p = random_plane(&mut rng, 8, 8);
        let sb = dwt2_haar(&p).unwrap();
        for by in 0..4 {
            for bx in 0..4 {
                let block: f64 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|&(dx, dy)| p.get(2 * bx + dx, 2 * by + dy).powi(2))
                    .sum();
                let bands = sb.ll.get(bx, by).powi(2)
                    + sb.lh.get(bx, by).powi(2)
                    + sb.hl.get(bx, by).powi(2)
                    + sb.hh.get(bx, by).powi(2);
                assert!((block - 4.0 * bands).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hh_ignores_constants_rows_and_columns() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let row_pattern: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        let col_pattern: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        for (name, p) in [
            ("constant", Plane::from_fn(10, 10, |_, _| 0.77)),
            ("rows", Plane::from_fn(10, 10, |_, y| row_pattern[y])),
            ("cols", Plane::from_fn(10, 10, |x, _| col_pattern[x])),
        ] {
            let sb = dwt2_haar(&p).unwrap();
            assert!(
                sb.hh.data().iter().all(|&v| v == 0.0),
                "{name} pattern must vanish in HH"
            );
        }
    }

    #[test]
    fn diagonal_hf_hand_values() {
        let flat = Tensor3::new(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = diagonal_hf(&flat).unwrap();
        assert_eq!(out.shape(), (1, 2, 2));
        assert!(out.data().iter().all(|&v| v == 0.0));

        let diag = Tensor3::new(1, 2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = diagonal_hf(&diag).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn diagonal_hf_of_constant_tensor_is_zero() {
        let t = Tensor3::from_fn(3, 6, 4, |_, _, _| 0.9);
        let out = diagonal_hf(&t).unwrap();
        assert_eq!(out.shape(), (3, 6, 4));
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diagonal_hf_upsamples_blockwise() {
        let t = Tensor3::from_fn(1, 4, 4, |_, y, x| (y * 4 + x) as f64);
        let out = diagonal_hf(&t).unwrap();
        let p = Plane::from_fn(4, 4, |x, y| (y * 4 + x) as f64);
        let hh = dwt2_haar(&p).unwrap().hh;
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(out.get(0, y, x), hh.get(x / 2, y / 2));
            }
        }
    }

    proptest! {
        #[test]
        fn transform_is_linear(seed in 0u64..200, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = random_plane(&mut rng, 6, 6);
            let g = random_plane(&mut rng, 6, 6);
            let combined = Plane::from_fn(6, 6, |x, y| a * f.get(x, y) + b * g.get(x, y));
            let sc = dwt2_haar(&combined).unwrap();
            let sf = dwt2_haar(&f).unwrap();
            let sg = dwt2_haar(&g).unwrap();
            for (band_c, band_f, band_g) in [
                (&sc.ll, &sf.ll, &sg.ll),
                (&sc.lh, &sf.lh, &sg.lh),
                (&sc.hl, &sf.hl, &sg.hl),
                (&sc.hh, &sf.hh, &sg.hh),
            ] {
                for i in 0..band_c.data().len() {
                    let expected = a * band_f.data()[i] + b * band_g.data()[i];
                    prop_assert!((band_c.data()[i] - expected).abs() < 1e-9);
                }
            }
        }
    }
}
