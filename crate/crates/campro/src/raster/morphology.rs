//! Binary morphology on masks with square structuring elements.

use super::{same_shape, BinaryMask, Kernel, RasterError};

/// Dilate `mask` by a k×k square structuring element.
///
/// A pixel is set in the output when any pixel of the k×k window centered
/// on it is set in the input. Pixels outside the image count as unset, so
/// dimensions are preserved.
///
/// A square window separates into a horizontal and a vertical run, so the
/// cost is O(N·k) rather than O(N·k²).
pub fn dilate(mask: &BinaryMask, kernel: Kernel) -> BinaryMask {
    let r = kernel.radius();
    if r == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let src = mask.data();

    // Horizontal pass: OR over [x-r, x+r] within each row.
    let mut horiz = vec![false; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut horiz[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            out[x] = row[lo..=hi].iter().any(|&b| b);
        }
    }

    // Vertical pass: OR over [y-r, y+r] within each column.
    let mut data = vec![false; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        for x in 0..w {
            let mut set = false;
            for yy in lo..=hi {
                if horiz[yy * w + x] {
                    set = true;
                    break;
                }
            }
            data[y * w + x] = set;
        }
    }

    BinaryMask::new(w, h, data).expect("dimensions preserved")
}

/// Pixelwise `a AND NOT b`.
pub fn mask_subtract(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask, RasterError> {
    same_shape!(a, b);
    let data = a
        .data()
        .iter()
        .zip(b.data().iter())
        .map(|(&x, &y)| x && !y)
        .collect();
    BinaryMask::new(a.width(), a.height(), data)
}
