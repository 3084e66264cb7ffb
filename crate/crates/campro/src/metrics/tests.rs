use super::*;
use rand::{Rng, SeedableRng};

fn random_pair(rng: &mut impl Rng, w: usize, h: usize) -> (FloatMap, BinaryMask) {
    let gt = BinaryMask::from_fn(w, h, |_, _| rng.random::<f64>() < 0.35);
    let pred = FloatMap::from_fn(w, h, |_, _| rng.random());
    (pred, gt)
}

#[test]
fn evaluate_pair_perfect_prediction_column() {
    let gt = BinaryMask::from_fn(12, 12, |x, y| (3..9).contains(&x) && (4..10).contains(&y));
    let pred = gt.to_float();
    let rec = evaluate_pair("img", &pred, &gt, &MetricConfig::default()).unwrap();
    assert!(rec.s_alpha.unwrap() > 1.0 - 1e-6);
    assert!(rec.wfm.unwrap() > 1.0 - 1e-6);
    assert!(rec.e_phi.unwrap() > 1.0 - 1e-6);
    assert!(rec.mae.unwrap() < 1e-9);
    assert_eq!(rec.dice.unwrap(), 1.0);
    assert_eq!(rec.iou.unwrap(), 1.0);
}

#[test]
fn evaluate_pair_inverted_prediction() {
    let gt = BinaryMask::from_fn(10, 10, |x, _| x < 4);
    let pred = FloatMap::from_fn(10, 10, |x, y| if gt.get(x, y) { 0.0 } else { 1.0 });
    let rec = evaluate_pair("inv", &pred, &gt, &MetricConfig::default()).unwrap();
    assert_eq!(rec.mae.unwrap(), 1.0);
    assert_eq!(rec.dice.unwrap(), 0.0);
    assert_eq!(rec.iou.unwrap(), 0.0);
}

#[test]
fn evaluate_pair_fields_equal_individual_ops() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
    let cfg = MetricConfig::default();
    for _ in 0..10 {
        let (pred, gt) = random_pair(&mut rng, 16, 16);
        let rec = evaluate_pair("x", &pred, &gt, &cfg).unwrap();
        assert_eq!(rec.s_alpha, Some(s_measure(&pred, &gt, &cfg).unwrap()));
        assert_eq!(rec.e_phi, Some(e_measure_mean(&pred, &gt, &cfg).unwrap()));
        assert_eq!(rec.mae, Some(mae(&pred, &gt).unwrap()));
        let (d, i) = dice_iou(&pred, &gt, &cfg).unwrap();
        assert_eq!(rec.dice, Some(d));
        assert_eq!(rec.iou, Some(i));
        if gt.count_set() > 0 {
            assert_eq!(rec.wfm, Some(weighted_fmeasure(&pred, &gt, &cfg).unwrap()));
        } else {
            assert_eq!(rec.wfm, None);
        }
    }
}

#[test]
fn empty_gt_skips_wfm_but_not_the_record() {
    let gt = BinaryMask::zeros(8, 8);
    let pred = FloatMap::constant(8, 8, 0.2);
    let rec = evaluate_pair("deg", &pred, &gt, &MetricConfig::default()).unwrap();
    assert_eq!(rec.wfm, None);
    assert!(rec.s_alpha.is_some());
    assert!(!rec.fully_skipped());
}

#[test]
fn all_metrics_stay_in_unit_interval() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(79);
    let cfg = MetricConfig::default();
    for _ in 0..50 {
        let w = rng.random_range(3..24);
        let h = rng.random_range(3..24);
        let (pred, gt) = random_pair(&mut rng, w, h);
        let rec = evaluate_pair("r", &pred, &gt, &cfg).unwrap();
        for v in [rec.s_alpha, rec.wfm, rec.e_phi, rec.mae, rec.dice, rec.iou]
            .into_iter()
            .flatten()
        {
            assert!((0.0..=1.0).contains(&v), "metric escaped [0,1]: {v}");
        }
    }
}

#[test]
fn aggregate_single_record_is_itself() {
    let gt = BinaryMask::from_fn(8, 8, |x, _| x < 3);
    let pred = gt.to_float();
    let rec = evaluate_pair("one", &pred, &gt, &MetricConfig::default()).unwrap();
    let report = aggregate(vec![rec.clone()]).unwrap();
    assert_eq!(report.count, 1);
    assert_eq!(report.mae.unwrap().mean, rec.mae.unwrap());
    assert_eq!(report.s_alpha.unwrap().mean, rec.s_alpha.unwrap());
}

#[test]
fn aggregate_means_two_records() {
    let mk = |mae_val: f64| PerImageRecord {
        id: "r".into(),
        s_alpha: None,
        wfm: None,
        e_phi: None,
        mae: Some(mae_val),
        dice: None,
        iou: None,
        config_fingerprint: "x".into(),
    };
    let report = aggregate(vec![mk(0.2), mk(0.4)]).unwrap();
    let m = report.mae.unwrap();
    assert_eq!(m.count, 2);
    assert!((m.mean - 0.3).abs() < 1e-15);
    assert_eq!(report.skipped, 2); // both records miss other metrics
}

#[test]
fn aggregate_matches_compensated_oracle_on_long_batches() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(83);
    let values: Vec<f64> = (0..100).map(|_| rng.random()).collect();
    let records: Vec<PerImageRecord> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| PerImageRecord {
            id: format!("r{i}"),
            s_alpha: Some(v),
            wfm: None,
            e_phi: None,
            mae: None,
            dice: None,
            iou: None,
            config_fingerprint: "x".into(),
        })
        .collect();
    let report = aggregate(records).unwrap();
    // Independent high-precision oracle: classic Kahan accumulation.
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for &v in &values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    let oracle = sum / values.len() as f64;
    assert!((report.s_alpha.unwrap().mean - oracle).abs() < 1e-12);
}

#[test]
fn aggregate_rejects_fully_skipped_batches() {
    let rec = PerImageRecord {
        id: "r".into(),
        s_alpha: None,
        wfm: None,
        e_phi: None,
        mae: None,
        dice: None,
        iou: None,
        config_fingerprint: "x".into(),
    };
    assert_eq!(aggregate(vec![rec]), Err(MetricError::EmptyReport));
    assert_eq!(aggregate(vec![]), Err(MetricError::EmptyReport));
}

#[test]
fn fingerprint_tracks_every_config_field() {
    let base = MetricConfig::default();
    let fp = base.fingerprint();
    assert_eq!(fp.len(), 16);
    for mutate in [
        |c: &mut MetricConfig| c.s_alpha = 0.6,
        |c: &mut MetricConfig| c.wfm_beta2 = 0.3,
        |c: &mut MetricConfig| c.wfm_blur_ksize = 5,
        |c: &mut MetricConfig| c.wfm_blur_sigma = 4.0,
        |c: &mut MetricConfig| c.wfm_decay_base = 0.4,
        |c: &mut MetricConfig| c.wfm_decay_scale = 6.0,
        |c: &mut MetricConfig| c.e_levels = 128,
        |c: &mut MetricConfig| c.dice_threshold = 0.4,
        |c: &mut MetricConfig| c.dice_mode = DiceMode::Continuous,
    ] {
        let mut changed = base.clone();
        mutate(&mut changed);
        assert_ne!(changed.fingerprint(), fp, "fingerprint must track change");
    }
}

#[test]
fn config_validation_rejects_bad_fields() {
    let mut cfg = MetricConfig::default();
    cfg.s_alpha = 1.5;
    assert!(cfg.validate().is_err());
    cfg = MetricConfig::default();
    cfg.e_levels = 0;
    assert!(cfg.validate().is_err());
    cfg = MetricConfig::default();
    cfg.wfm_blur_ksize = 6;
    assert!(cfg.validate().is_err());
}
