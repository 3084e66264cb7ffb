//! Exact Euclidean distance transforms.
//!
//! Squared distances are integers, so the two-pass lower-envelope method
//! can run entirely in integer arithmetic: parabola intersections are kept
//! as rationals and compared by cross-multiplication. The output is exact,
//! not just close.

use super::BinaryMask;

/// Sentinel squared distance for pixels with no foreground anywhere.
pub const UNREACHABLE: u64 = u64::MAX;

/// Per-pixel squared Euclidean distance to the nearest set pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    dist_sq: Vec<u64>,
}

impl DistanceMap {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Exact squared distance; [`UNREACHABLE`] when the mask was empty.
    #[inline]
    pub fn dist_sq(&self, x: usize, y: usize) -> u64 {
        self.dist_sq[y * self.width + x]
    }

    #[inline]
    pub fn dist_sq_data(&self) -> &[u64] {
        &self.dist_sq
    }

    /// Euclidean distance; +∞ when the mask was empty.
    #[inline]
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        let d = self.dist_sq(x, y);
        if d == UNREACHABLE {
            f64::INFINITY
        } else {
            (d as f64).sqrt()
        }
    }
}

/// Exact Euclidean distance to the nearest set pixel; 0 on set pixels.
///
/// An empty mask yields [`UNREACHABLE`] everywhere.
pub fn distance_transform(mask: &BinaryMask) -> DistanceMap {
    let (w, h) = (mask.width(), mask.height());

    // Column pass: squared vertical distance to the nearest set pixel in
    // the same column.
    let mut vert = vec![UNREACHABLE; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if mask.get(x, y) {
                last = Some(y);
            }
            if let Some(r) = last {
                vert[y * w + x] = ((y - r) * (y - r)) as u64;
            }
        }
        last = None;
        for y in (0..h).rev() {
            if mask.get(x, y) {
                last = Some(y);
            }
            if let Some(r) = last {
                let d = ((r - y) * (r - y)) as u64;
                let cell = &mut vert[y * w + x];
                if d < *cell {
                    *cell = d;
                }
            }
        }
    }

    // Row pass: lower envelope of x ↦ (x-q)² + vert[q] over columns q.
    let mut dist_sq = vec![UNREACHABLE; w * h];
    let mut sites = vec![0usize; w + 1];
    // Envelope breakpoints as rationals num/den with den > 0; the k-th
    // parabola covers x in [z[k], z[k+1]).
    let mut z_num = vec![0i64; w + 1];
    let mut z_den = vec![1i64; w + 1];
    for y in 0..h {
        let row = &vert[y * w..(y + 1) * w];
        let mut k = 0usize;
        let mut started = false;
        for q in 0..w {
            if row[q] == UNREACHABLE {
                continue;
            }
            let fq = row[q] as i64 + (q * q) as i64;
            if !started {
                sites[0] = q;
                z_num[0] = i64::MIN / 4;
                z_den[0] = 1;
                started = true;
                k = 0;
                continue;
            }
            loop {
                let p = sites[k];
                let fp = row[p] as i64 + (p * p) as i64;
                // Intersection of parabolas rooted at p and q.
                let num = fq - fp;
                let den = 2 * (q as i64 - p as i64);
                // Pop while the new breakpoint is at or left of z[k].
                if (num as i128) * (z_den[k] as i128) <= (z_num[k] as i128) * (den as i128) {
                    if k == 0 {
                        sites[0] = q;
                        break;
                    }
                    k -= 1;
                } else {
                    k += 1;
                    sites[k] = q;
                    z_num[k] = num;
                    z_den[k] = den;
                    break;
                }
            }
        }
        if !started {
            continue; // row has no reachable column
        }
        let top = k;
        k = 0;
        for x in 0..w {
            while k < top && (z_num[k + 1] as i128) < (x as i128) * (z_den[k + 1] as i128) {
                k += 1;
            }
            let q = sites[k];
            let dx = x as i64 - q as i64;
            dist_sq[y * w + x] = row[q] + (dx * dx) as u64;
        }
    }

    DistanceMap {
        width: w,
        height: h,
        dist_sq,
    }
}

/// Linear row-major index of the nearest set pixel for every pixel.
///
/// Ties resolve to the smallest squared distance first, then the smallest
/// linear index. `u32::MAX` marks an empty mask. Cost is O(H·W²) worst
/// case, which the metric suite tolerates at evaluation sizes.
pub fn nearest_foreground(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = vec![u32::MAX; w * h];

    // Column pass: nearest set row per column, lower row wins ties.
    let mut col_row = vec![usize::MAX; w * h];
    let mut col_d2 = vec![UNREACHABLE; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if mask.get(x, y) {
                last = Some(y);
            }
            if let Some(r) = last {
                col_row[y * w + x] = r;
                col_d2[y * w + x] = ((y - r) * (y - r)) as u64;
            }
        }
        last = None;
        for y in (0..h).rev() {
            if mask.get(x, y) {
                last = Some(y);
            }
            if let Some(r) = last {
                let d = ((r - y) * (r - y)) as u64;
                let i = y * w + x;
                // Strict improvement only: on a tie the earlier (smaller)
                // row from the forward scan stays.
                if d < col_d2[i] {
                    col_d2[i] = d;
                    col_row[i] = r;
                }
            }
        }
    }

    for y in 0..h {
        for x in 0..w {
            let mut best_d2 = UNREACHABLE;
            let mut best_idx = u32::MAX;
            for q in 0..w {
                let c = y * w + q;
                if col_d2[c] == UNREACHABLE {
                    continue;
                }
                let dx = x as i64 - q as i64;
                let d2 = col_d2[c] + (dx * dx) as u64;
                let idx = (col_row[c] * w + q) as u32;
                if d2 < best_d2 || (d2 == best_d2 && idx < best_idx) {
                    best_d2 = d2;
                    best_idx = idx;
                }
            }
            out[y * w + x] = best_idx;
        }
    }
    out
}
