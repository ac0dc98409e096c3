use fedabc::gmm::{fit_gmm_em, fit_gmm_em_traced, gmm_density, gmm_log_density, sample_gmm, EmConfig};
use fedabc::{Error, GmmParams, Matrix, RngHandle, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

fn scalar(pi: &[f64], mu: &[f64], var: &[f64]) -> GmmParams {
    GmmParams::new(
        pi.to_vec(),
        mu.iter().map(|&m| Vector::from_element(1, m)).collect(),
        var.iter().map(|&v| Matrix::from_element(1, 1, v)).collect(),
    )
    .unwrap()
}

#[test]
fn standard_normal_peak() {
    let p = scalar(&[1.0], &[0.0], &[1.0]);
    let want = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((gmm_density(&p, &[0.0]).unwrap() - want).abs() < 1e-9);
}

#[test]
fn quadrature_integrates_to_one() {
    let p = scalar(&[0.3, 0.7], &[-2.0, 2.0], &[1.0, 1.0]);
    let h = 1e-3;
    let steps = 20_000;
    let f = |i: usize| gmm_density(&p, &[-10.0 + i as f64 * h]).unwrap();
    let mut total = 0.5 * (f(0) + f(steps));
    for i in 1..steps {
        total += f(i);
    }
    assert!((total * h - 1.0).abs() < 1e-6, "integral {}", total * h);
}

#[test]
fn duplicated_component_matches_single() {
    let sigma = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let mu = Vector::from_vec(vec![0.5, -1.0]);
    let one = GmmParams::new(vec![1.0], vec![mu.clone()], vec![sigma.clone()]).unwrap();
    let two = GmmParams::new(vec![0.5, 0.5], vec![mu.clone(), mu], vec![sigma.clone(), sigma]).unwrap();
    let mut r = RngHandle::new(1, 0).rng();
    for _ in 0..10 {
        let x = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
        assert!((gmm_density(&one, &x).unwrap() - gmm_density(&two, &x).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn permuting_components_keeps_density() {
    let mut r = RngHandle::new(2, 0).rng();
    let k = 4;
    let mus: Vec<Vector> = (0..k)
        .map(|_| Vector::from_fn(2, |_, _| r.random_range(-3.0..3.0)))
        .collect();
    let sigmas: Vec<Matrix> = (0..k)
        .map(|_| {
            let a = Matrix::from_fn(2, 2, |_, _| r.random_range(-1.0..1.0));
            &a * a.transpose() + Matrix::identity(2, 2) * 0.5
        })
        .collect();
    let pi = vec![0.1, 0.2, 0.3, 0.4];
    let p = GmmParams::new(pi.clone(), mus.clone(), sigmas.clone()).unwrap();
    let order = [2, 0, 3, 1];
    let q = GmmParams::new(
        order.iter().map(|&i| pi[i]).collect(),
        order.iter().map(|&i| mus[i].clone()).collect(),
        order.iter().map(|&i| sigmas[i].clone()).collect(),
    )
    .unwrap();
    for _ in 0..20 {
        let x = [r.random_range(-4.0..4.0), r.random_range(-4.0..4.0)];
        let (a, b) = (gmm_log_density(&p, &x).unwrap(), gmm_log_density(&q, &x).unwrap());
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn dimension_mismatch_is_a_shape_error() {
    let p = scalar(&[1.0], &[0.0], &[1.0]);
    assert!(matches!(gmm_density(&p, &[0.0, 1.0]), Err(Error::Shape(_))));
}

#[test]
fn balanced_far_components_split_evenly() {
    let p = scalar(&[0.5, 0.5], &[-10.0, 10.0], &[1.0, 1.0]);
    let (x, z) = sample_gmm(&p, 10_000, &mut RngHandle::new(3, 0).rng());
    let neg = x.iter().filter(|&&v| v < 0.0).count() as f64 / 1e4;
    assert!((0.47..=0.53).contains(&neg), "fraction {neg}");
    assert_eq!(z.0.len(), 10_000);
}

#[test]
fn zero_weight_component_never_drawn() {
    let p = scalar(&[1.0, 0.0], &[0.0, 5.0], &[1.0, 1.0]);
    let (_, z) = sample_gmm(&p, 5000, &mut RngHandle::new(4, 0).rng());
    assert!(z.0.iter().all(|&k| k == 0));
}

#[test]
fn single_component_sampling_has_its_moments() {
    let mu = Vector::from_vec(vec![1.0, -2.0]);
    let sigma = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let p = GmmParams::new(vec![1.0], vec![mu.clone()], vec![sigma.clone()]).unwrap();
    let n = 100_000;
    let (x, _) = sample_gmm(&p, n, &mut RngHandle::new(5, 0).rng());
    let mean = x.row_sum().transpose() / n as f64;
    assert!((&mean - &mu).amax() < 0.02);
    let centered = Matrix::from_fn(n, 2, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    assert!((cov - sigma).amax() < 0.05);
}

/// Chi-square goodness of fit of component frequencies against π.
#[test]
fn assignment_frequencies_follow_weights() {
    let pi = [0.1, 0.2, 0.3, 0.4];
    let p = scalar(&pi, &[0.0, 1.0, 2.0, 3.0], &[1.0; 4]);
    let n = 100_000;
    let (_, z) = sample_gmm(&p, n, &mut RngHandle::new(6, 0).rng());
    let mut counts = [0usize; 4];
    z.0.iter().for_each(|&k| counts[k] += 1);
    let chi2: f64 = counts
        .iter()
        .zip(pi)
        .map(|(&o, p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // upper 1e-4 quantile of chi-square with 3 degrees of freedom
    assert!(chi2 < 21.108, "chi-square {chi2}");
}

#[test]
fn single_component_em_is_closed_form() {
    let mut r = RngHandle::new(7, 0).rng();
    let n = 50;
    let data = Matrix::from_fn(n, 3, |_, j| r.sample::<f64, _>(StandardNormal) * (j + 1) as f64);
    let p = fit_gmm_em(&data, 1, EmConfig::default(), &mut r).unwrap();
    let mean = data.row_sum().transpose() / n as f64;
    let centered = Matrix::from_fn(n, 3, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    assert!((&p.means()[0] - &mean).amax() < 1e-12);
    assert!((&p.covariances()[0] - &cov).amax() < 1e-10);
    assert_eq!(p.weights(), &[1.0]);
}

fn two_clusters(seed: u64) -> Matrix {
    let mut r = RngHandle::new(seed, 0).rng();
    Matrix::from_fn(400, 2, |i, _| {
        let centre = if i < 200 { -5.0 } else { 5.0 };
        centre + r.sample::<f64, _>(StandardNormal)
    })
}

#[test]
fn em_recovers_two_clusters() {
    let data = two_clusters(8);
    let fit = fit_gmm_em_traced(&data, 2, EmConfig::default(), &mut RngHandle::new(8, 1).rng()).unwrap();
    for target in [-5.0, 5.0] {
        let t = Vector::from_element(2, target);
        let best = fit
            .params
            .means()
            .iter()
            .map(|m| (m - &t).amax())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 0.15, "closest mean off by {best}");
    }
    for w in fit.log_likelihood.windows(2) {
        assert!(w[1] >= w[0] - 1e-8, "log-likelihood fell {} -> {}", w[0], w[1]);
    }
    assert!(fit.converged);
}

#[test]
fn em_needs_as_many_rows_as_components() {
    let data = Matrix::zeros(3, 2);
    assert!(matches!(
        fit_gmm_em(&data, 4, EmConfig::default(), &mut RngHandle::new(0, 0).rng()),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn em_survives_minority_sized_latents() {
    // nine rows in 24 dimensions, several components: the routine local-baseline shape
    let mut r = RngHandle::new(9, 0).rng();
    let data = Matrix::from_fn(9, 24, |_, _| r.random_range(-0.9..0.9));
    let p = fit_gmm_em(&data, 8, EmConfig::default(), &mut r).unwrap();
    assert_eq!(p.components(), 8);
    assert!(p.covariances().iter().all(|s| s.clone().cholesky().is_some()));
}

#[test]
fn em_survives_nearly_collapsed_rows() {
    let mut r = RngHandle::new(10, 0).rng();
    let base: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
    let data = Matrix::from_fn(6, 5, |i, j| base[j] + if i == 0 { 1e-160 } else { 0.0 });
    let p = fit_gmm_em(&data, 3, EmConfig::default(), &mut r).unwrap();
    assert!(p.covariances().iter().all(|s| s.iter().all(|v| v.is_finite())));
}

#[test]
fn params_json_shape() {
    let p = scalar(&[0.25, 0.75], &[-1.0, 1.0], &[1.0, 2.0]);
    let v: serde_json::Value = serde_json::to_value(&p).unwrap();
    assert_eq!(v["pi"], serde_json::json!([0.25, 0.75]));
    assert_eq!(v["mu"], serde_json::json!([[-1.0], [1.0]]));
    assert_eq!(v["sigma"], serde_json::json!([[[1.0]], [[2.0]]]));
    let back: GmmParams = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
}
