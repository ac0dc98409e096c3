use fedabc::evaluation::{
    apply_cutoff, compute_metrics, f1_score, local_components, oversample_count, oversample_local_gmm, run_condition,
    select_cutoff, Condition, EvalConfig, SiteFeatures, SplitFeatures,
};
use fedabc::gmm::EmConfig;
use fedabc::{Error, Matrix, RngHandle};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn site_one_f1_from_rounded_and_exact_rates() {
    // three of seven predicted positives are correct, three of six positives found
    let exact = f1_score(3.0 / 7.0, 0.5);
    assert!((exact - 6.0 / 13.0).abs() < 1e-15);
    assert!((exact - 0.4615).abs() < 5e-5);
    // the four-decimal precision 0.4286 lands 5.5e-5 away from 0.4615
    let rounded = f1_score(0.4286, 0.5);
    assert!((rounded - 0.461555).abs() < 1e-6, "{rounded}");
}

fn confusion_fixture(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Vec<u8>, Vec<u8>) {
    let mut pred = Vec::new();
    let mut y = Vec::new();
    for (p, l, n) in [(1, 1, tp), (1, 0, fp), (0, 1, fn_), (0, 0, tn)] {
        pred.extend(std::iter::repeat_n(p, n));
        y.extend(std::iter::repeat_n(l, n));
    }
    (pred, y)
}

#[test]
fn hand_confusion_fixtures() {
    let (p, y) = confusion_fixture(5, 5, 5, 25);
    let m = compute_metrics(&p, &y).unwrap();
    assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (0.75, 0.5, 0.5, 0.5));
    assert_eq!(m.specificity, 25.0 / 30.0);

    // reference site-one figures: 3 of 6 positives found, 4 false alarms
    let (p, y) = confusion_fixture(3, 4, 3, 30);
    let m = compute_metrics(&p, &y).unwrap();
    assert_eq!(m.recall, 0.5);
    assert_eq!(m.specificity, 30.0 / 34.0);
    assert_eq!(m.precision, 3.0 / 7.0);
    assert!((m.f1 - 0.4615).abs() < 5e-5);

    let (p, y) = confusion_fixture(0, 0, 4, 6);
    let m = compute_metrics(&p, &y).unwrap();
    assert_eq!((m.precision, m.f1), (0.0, 0.0));
    assert!(m.degenerate.precision && m.degenerate.f1 && !m.degenerate.recall);
}

#[test]
fn site_one_needs_forty_two_rows() {
    let y: Vec<u8> = (0..60).map(|i| u8::from(i < 9)).collect();
    assert_eq!(oversample_count(&y), 42);
    let mut r = RngHandle::new(1, 0).rng();
    let minority = Matrix::from_fn(9, 3, |_, _| r.random_range(-0.9..0.9));
    let rows = oversample_local_gmm(
        &minority,
        local_components(9),
        42,
        EmConfig::default(),
        RngHandle::new(1, 1),
    )
    .unwrap();
    assert_eq!(rows.shape(), (42, 3));
    assert!(rows.iter().all(|v| v.is_finite()));
}

fn split(seed: u64, major: usize, minor: usize, shift: f64) -> SplitFeatures {
    let mut r = RngHandle::new(seed, 0).rng();
    let mut make = |n_major: usize, n_minor: usize| {
        let n = n_major + n_minor;
        let y: Vec<u8> = (0..n).map(|i| u8::from(i >= n_major)).collect();
        let x = Matrix::from_fn(n, 3, |i, _| {
            r.sample::<f64, _>(StandardNormal) * 0.5 + if y[i] == 1 { shift } else { 0.0 }
        });
        (x, y)
    };
    let (train_x, train_y) = make(major, minor);
    let (test_x, test_y) = make(major / 2, minor / 2 + 1);
    SplitFeatures {
        train_x,
        train_y,
        test_x,
        test_y,
    }
}

fn sites() -> Vec<SiteFeatures> {
    (1..=3u32)
        .map(|id| {
            let local = split(u64::from(id), 30, 6, 1.0);
            let mut r = RngHandle::new(50 + u64::from(id), 0).rng();
            let abc = Matrix::from_fn(24, 3, |_, _| 1.0 + 0.5 * r.sample::<f64, _>(StandardNormal));
            SiteFeatures {
                site_id: id,
                global: Some(local.clone()),
                local,
                abc_rows: Some(abc),
            }
        })
        .collect()
}

#[test]
fn four_conditions_by_three_sites() {
    let s = sites();
    let cfg = EvalConfig::default();
    let mut rows = Vec::new();
    for c in Condition::ALL {
        rows.extend(run_condition(c, &s, &cfg, RngHandle::new(9, 0)).unwrap());
    }
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let m = r.metrics;
        for v in [m.accuracy, m.sensitivity, m.specificity, m.precision, m.recall, m.f1] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!((m.f1 - f1_score(m.precision, m.recall)).abs() < 1e-12);
        assert!(r.cutoff > 0.0 && r.cutoff < 1.0);
    }
}

#[test]
fn missing_artifacts_are_named() {
    let mut s = sites();
    s[1].abc_rows = None;
    let err = run_condition(Condition::Abc, &s, &EvalConfig::default(), RngHandle::new(0, 0)).unwrap_err();
    assert!(matches!(&err, Error::MissingArtifact(msg) if msg.contains("site 2")));
    s[0].global = None;
    assert!(matches!(
        run_condition(Condition::Global, &s, &EvalConfig::default(), RngHandle::new(0, 0)),
        Err(Error::MissingArtifact(_))
    ));
    let mut s = sites();
    s[0].abc_rows = Some(Matrix::zeros(5, 3));
    assert!(matches!(
        run_condition(Condition::Abc, &s, &EvalConfig::default(), RngHandle::new(0, 0)),
        Err(Error::Shape(_))
    ));
}

/// Exhaustive oracle: every distinct probability, F1 of `p >= c` as the exact
/// fraction `2tp / (2tp + fp + fn)`, smallest maximizer.
fn brute_force_cutoff(probs: &[f64], y: &[u8]) -> (f64, f64) {
    let mut cands: Vec<f64> = probs.to_vec();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut best: Option<(f64, u64, u64)> = None;
    for c in cands {
        let pred = apply_cutoff(probs, c);
        let count = |p: u8, l: u8| pred.iter().zip(y).filter(|&(&a, &b)| a == p && b == l).count() as u64;
        let (num, den) = (2 * count(1, 1), 2 * count(1, 1) + count(1, 0) + count(0, 1));
        if best.is_none_or(|(_, bn, bd)| num * bd > bn * den) {
            best = Some((c, num, den));
        }
    }
    let (c, num, den) = best.unwrap();
    (c, num as f64 / den as f64)
}

fn labelled_probs() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..40)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((1u32..20).prop_map(|k| f64::from(k) / 20.0), n),
                prop::collection::vec(0u8..=1, n),
            )
        })
        .prop_filter("needs a positive label", |(_, y)| y.contains(&1))
}

proptest! {
    #[test]
    fn cutoff_matches_exhaustive_search((probs, y) in labelled_probs()) {
        let cut = select_cutoff(&probs, &y).unwrap();
        let (value, f1) = brute_force_cutoff(&probs, &y);
        prop_assert_eq!(cut.value, value);
        prop_assert!((cut.f1 - f1).abs() < 1e-12);
    }

    #[test]
    fn cutoff_follows_monotone_transforms((probs, y) in labelled_probs()) {
        let squashed: Vec<f64> = probs.iter().map(|p| p.powi(3)).collect();
        let a = select_cutoff(&probs, &y).unwrap();
        let b = select_cutoff(&squashed, &y).unwrap();
        prop_assert_eq!(a.value.powi(3), b.value);
        prop_assert_eq!(a.f1, b.f1);
    }

    #[test]
    fn metrics_are_rates(pred in prop::collection::vec(0u8..=1, 1..60), seed in any::<u64>()) {
        let mut r = RngHandle::new(seed, 0).rng();
        let y: Vec<u8> = pred.iter().map(|_| u8::from(r.random_bool(0.3))).collect();
        let m = compute_metrics(&pred, &y).unwrap();
        let c = m.confusion;
        prop_assert_eq!(c.tp + c.fp + c.tn + c.fn_, y.len());
        for v in [m.accuracy, m.sensitivity, m.specificity, m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(m.sensitivity, m.recall);
        prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
    }
}
