use fedabc::dataprep::{
    components_for, correlation_filter, load_csv, partition_sites, standardize, stratified_split, synth_generate,
    CsvColumns, Dataset, SiteProfile, StandardizationStats, SynthSpec, DEFAULT_TRAIN_FRACTION,
};
use fedabc::{Matrix, RngHandle};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

fn default_data(seed: u64) -> Dataset {
    synth_generate(&SynthSpec::default(), RngHandle::new(seed, 0))
        .unwrap()
        .dataset
}

#[test]
fn default_profile_reproduces_the_site_counts() {
    let data = default_data(1);
    assert_eq!(data.len(), 310);
    assert_eq!(data.dim(), 88);
    let part = partition_sites(
        &data,
        &SiteProfile::DEFAULT,
        DEFAULT_TRAIN_FRACTION,
        RngHandle::new(1, 1),
    )
    .unwrap();
    let train: Vec<(usize, usize)> = part.sites.iter().map(|s| s.train.class_counts()).collect();
    let test: Vec<(usize, usize)> = part.sites.iter().map(|s| s.test.class_counts()).collect();
    assert_eq!(train, vec![(51, 9), (46, 8), (62, 10)]);
    assert_eq!(test, vec![(34, 6), (31, 5), (42, 6)]);
    assert_eq!(components_for(&part.minority_train_counts()), 24);
}

#[test]
fn partition_is_reproducible() {
    let data = default_data(2);
    let a = partition_sites(&data, &SiteProfile::DEFAULT, 0.6, RngHandle::new(2, 1)).unwrap();
    let b = partition_sites(&data, &SiteProfile::DEFAULT, 0.6, RngHandle::new(2, 1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(default_data(2), data);
}

#[test]
fn test_side_uses_training_statistics_only() {
    let mut r = RngHandle::new(3, 0).rng();
    let x = Matrix::from_fn(30, 4, |_, j| 3.0 * j as f64 + r.sample::<f64, _>(StandardNormal));
    let names: Vec<String> = (0..4).map(|j| format!("f{j}")).collect();
    let train = Dataset::new(x, vec![0; 30], names.clone()).unwrap();
    let test = Dataset::new(Matrix::zeros(5, 4), vec![0; 5], names).unwrap();
    let (tr, te, stats) = standardize(&train, &test).unwrap();
    for j in 0..4 {
        let col = tr.x.column(j);
        let mean = col.mean();
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 30.0).sqrt();
        assert!(mean.abs() < 1e-10);
        assert!((sd - 1.0).abs() < 1e-10);
        for i in 0..5 {
            assert_eq!(te.x[(i, j)], -stats.mean[j] / stats.scale[j]);
        }
    }
    let again = StandardizationStats::fit(&tr.x).unwrap().apply(&tr.x);
    assert!((again - &tr.x).amax() < 1e-12);
}

#[test]
fn independent_columns_survive_the_filter() {
    for seed in 0..5 {
        let mut r = RngHandle::new(seed, 0).rng();
        let x = Matrix::from_fn(1000, 12, |_, _| r.sample::<f64, _>(StandardNormal));
        assert_eq!(correlation_filter(&x, 0.8).unwrap(), (0..12).collect::<Vec<_>>());
    }
}

#[test]
fn csv_round_trip_keeps_values_and_ids() {
    let data = default_data(4).subset(&[0, 5, 9, 200]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    data.write_csv(&path, "label").unwrap();
    let cols = CsvColumns {
        row_id: Some("row_id".into()),
        ..CsvColumns::label("label")
    };
    let back = load_csv(&path, &cols).unwrap().dataset;
    assert_eq!(back.x, data.x);
    assert_eq!(back.y, data.y);
    assert_eq!(back.feature_names, data.feature_names);
    assert_eq!(back.row_ids, data.row_ids);
}

#[test]
fn missing_file_is_an_error() {
    assert!(load_csv(std::path::Path::new("/nonexistent/x.csv"), &CsvColumns::label("label")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partitions_cover_every_row_once(seed in any::<u64>(), frac in 0.3f64..0.8) {
        let data = default_data(seed % 4);
        let part = partition_sites(&data, &SiteProfile::DEFAULT, frac, RngHandle::new(seed, 1)).unwrap();
        let mut ids: Vec<usize> = part
            .sites
            .iter()
            .flat_map(|s| s.train.row_ids.iter().chain(&s.test.row_ids).copied())
            .collect();
        ids.sort_unstable();
        let mut all = data.row_ids.clone();
        all.sort_unstable();
        prop_assert_eq!(ids, all);
    }

    #[test]
    fn split_counts_round_half_up(major in 2usize..60, minor in 2usize..20, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let n = major + minor;
        let y: Vec<u8> = (0..n).map(|i| u8::from(i < minor)).collect();
        let data = Dataset::new(Matrix::from_fn(n, 1, |i, _| i as f64), y, vec!["a".into()]).unwrap();
        let (train, test) = stratified_split(&data, frac, RngHandle::new(seed, 0)).unwrap();
        let want = |c: usize| (c as f64 * frac + 0.5).floor() as usize;
        prop_assert_eq!(train.class_counts(), (want(major), want(minor)));
        prop_assert_eq!(test.class_counts(), (major - want(major), minor - want(minor)));
    }

    #[test]
    fn filter_ignores_row_order(seed in any::<u64>(), threshold in 0.3f64..0.95) {
        let mut r = RngHandle::new(seed, 0).rng();
        let base = Matrix::from_fn(40, 3, |_, _| r.sample::<f64, _>(StandardNormal));
        // mix in correlated copies so some columns are dropped
        let x = Matrix::from_fn(40, 6, |i, j| if j < 3 { base[(i, j)] } else { base[(i, j - 3)] + 0.7 * r.sample::<f64, _>(StandardNormal) });
        let mut order: Vec<usize> = (0..40).collect();
        order.shuffle(&mut r);
        let shuffled = Matrix::from_fn(40, 6, |i, j| x[(order[i], j)]);
        prop_assert_eq!(correlation_filter(&x, threshold).unwrap(), correlation_filter(&shuffled, threshold).unwrap());
    }
}
