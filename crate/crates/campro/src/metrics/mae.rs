use super::{check_shapes, MetricError};
use crate::raster::{BinaryMask, FloatMap};

/// Mean absolute error between a [0,1] prediction and a binary mask.
pub fn mae(pred: &FloatMap, gt: &BinaryMask) -> Result<f64, MetricError> {
    check_shapes(pred, gt)?;
    let total: f64 = pred
        .data()
        .iter()
        .zip(gt.data().iter())
        .map(|(&p, &g)| if g { 1.0 - p } else { p })
        .sum();
    Ok(total / pred.data().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_is_zero() {
        let gt = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        let pred = gt.to_float();
        assert_eq!(mae(&pred, &gt).unwrap(), 0.0);
    }

    #[test]
    fn inverted_prediction_is_one() {
        let gt = BinaryMask::from_fn(4, 4, |x, y| (x + y) % 2 == 0);
        let pred = FloatMap::from_fn(4, 4, |x, y| if gt.get(x, y) { 0.0 } else { 1.0 });
        assert_eq!(mae(&pred, &gt).unwrap(), 1.0);
    }

    #[test]
    fn four_unit_errors_in_sixteen_pixels() {
        let gt = BinaryMask::zeros(4, 4);
        let pred = FloatMap::from_fn(4, 4, |_, y| if y == 0 { 1.0 } else { 0.0 });
        assert_eq!(mae(&pred, &gt).unwrap(), 0.25);
    }

    #[test]
    fn complement_identity_for_binary_predictions() {
        let gt = BinaryMask::from_fn(5, 5, |x, y| x * y % 3 == 1);
        let pred = FloatMap::from_fn(5, 5, |x, y| usize::from((x + 2 * y) % 4 == 0) as f64);
        let inv = FloatMap::from_fn(5, 5, |x, y| 1.0 - pred.get(x, y));
        let total = mae(&pred, &gt).unwrap() + mae(&inv, &gt).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
