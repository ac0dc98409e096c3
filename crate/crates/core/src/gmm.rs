//! Gaussian mixture model: density, forward sampling, and an EM fit used by
//! the local oversampling baseline.

use std::f64::consts::PI;

use log::debug;
use nalgebra::{Cholesky, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, log_det};
use crate::{Error, Matrix, Result, Vector};

/// Mixture weights, component means and covariances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GmmParamsDoc", into = "GmmParamsDoc")]
pub struct GmmParams {
    pi: Vec<f64>,
    mu: Vec<Vector>,
    sigma: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
struct GmmParamsDoc {
    pi: Vec<f64>,
    mu: Vec<Vec<f64>>,
    sigma: Vec<Vec<Vec<f64>>>,
}

impl From<GmmParams> for GmmParamsDoc {
    fn from(p: GmmParams) -> Self {
        Self {
            pi: p.pi,
            mu: p.mu.iter().map(|m| m.iter().copied().collect()).collect(),
            sigma: p.sigma.iter().map(linalg::to_rows).collect(),
        }
    }
}

impl TryFrom<GmmParamsDoc> for GmmParams {
    type Error = Error;

    fn try_from(doc: GmmParamsDoc) -> Result<Self> {
        let mu = doc.mu.into_iter().map(Vector::from_vec).collect();
        let sigma = doc
            .sigma
            .iter()
            .map(|s| linalg::from_rows(s))
            .collect::<Result<Vec<_>>>()?;
        GmmParams::new(doc.pi, mu, sigma)
    }
}

/// Component index per generated row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentAssignment(pub Vec<usize>);

impl GmmParams {
    pub fn new(pi: Vec<f64>, mu: Vec<Vector>, sigma: Vec<Matrix>) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::InvalidHyperparameter("mixture has no components".into()));
        }
        if mu.len() != k || sigma.len() != k {
            return Err(Error::Shape(format!(
                "{k} weights but {} means and {} covariances",
                mu.len(),
                sigma.len()
            )));
        }
        if pi.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidHyperparameter("weights must lie in [0, 1]".into()));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidHyperparameter(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let d = mu[0].len();
        for (m, s) in mu.iter().zip(&sigma) {
            if m.len() != d || s.nrows() != d || s.ncols() != d {
                return Err(Error::Shape("components disagree on dimension".into()));
            }
            linalg::cholesky(s)?;
        }
        Ok(Self { pi, mu, sigma })
    }

    pub fn components(&self) -> usize {
        self.pi.len()
    }

    pub fn dim(&self) -> usize {
        self.mu[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.pi
    }

    pub fn means(&self) -> &[Vector] {
        &self.mu
    }

    pub fn covariances(&self) -> &[Matrix] {
        &self.sigma
    }

    /// Cholesky factors of every component, for repeated evaluation or sampling.
    pub fn prepare(&self) -> PreparedGmm<'_> {
        let chol = self
            .sigma
            .iter()
            .map(|s| Cholesky::new(linalg::symmetrize(s)).expect("validated positive definite"))
            .collect::<Vec<_>>();
        let log_norm = chol
            .iter()
            .map(|c| -0.5 * (self.dim() as f64 * (2.0 * PI).ln() + log_det(c)))
            .collect();
        let lower = chol.iter().map(|c| c.l()).collect();
        PreparedGmm {
            params: self,
            chol,
            lower,
            log_norm,
        }
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.prepare().log_density(x)
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }
}

/// A [`GmmParams`] with factored covariances.
pub struct PreparedGmm<'a> {
    params: &'a GmmParams,
    chol: Vec<Cholesky<f64, Dyn>>,
    lower: Vec<Matrix>,
    log_norm: Vec<f64>,
}

impl PreparedGmm<'_> {
    fn component_log_pdf(&self, k: usize, x: &Vector) -> f64 {
        let diff = x - &self.params.mu[k];
        let z = self.chol[k]
            .l_dirty()
            .solve_lower_triangular(&diff)
            .expect("non-singular factor");
        self.log_norm[k] - 0.5 * z.norm_squared()
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let d = self.params.dim();
        if x.len() != d {
            return Err(Error::Shape(format!("point has dimension {}, expected {d}", x.len())));
        }
        let x = Vector::from_column_slice(x);
        let terms: Vec<f64> = (0..self.params.components())
            .map(|k| self.params.pi[k].ln() + self.component_log_pdf(k, &x))
            .collect();
        Ok(log_sum_exp(&terms))
    }

    fn draw_component<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (k, &p) in self.params.pi.iter().enumerate() {
            if p > 0.0 {
                last_positive = k;
                acc += p;
                if u < acc {
                    return k;
                }
            }
        }
        last_positive
    }

    /// Draws `n` rows: a component `z ~ Categorical(pi)`, then `N(mu_z, sigma_z)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Matrix, ComponentAssignment) {
        let d = self.params.dim();
        let mut out = Matrix::zeros(n, d);
        let mut z = Vec::with_capacity(n);
        let mut noise = Vector::zeros(d);
        for i in 0..n {
            let k = self.draw_component(rng);
            noise.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let row = &self.params.mu[k] + &self.lower[k] * &noise;
            for j in 0..d {
                out[(i, j)] = row[j];
            }
            z.push(k);
        }
        (out, ComponentAssignment(z))
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn gmm_density(params: &GmmParams, x: &[f64]) -> Result<f64> {
    params.density(x)
}

pub fn gmm_log_density(params: &GmmParams, x: &[f64]) -> Result<f64> {
    params.log_density(x)
}

pub fn sample_gmm<R: Rng + ?Sized>(params: &GmmParams, n: usize, rng: &mut R) -> (Matrix, ComponentAssignment) {
    params.prepare().sample(n, rng)
}

/// EM stopping rule and iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Convergence threshold on the change of the mean log-likelihood.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub params: GmmParams,
    /// Mean log-likelihood evaluated at each E-step.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

/// Largest accepted ratio between the biggest and smallest squared
/// Cholesky pivots before a covariance counts as numerically singular.
const MAX_PIVOT_RATIO: f64 = 1e12;
/// Escalations of the ridge before giving up.
const MAX_RIDGE_STEPS: usize = 40;

/// Factors `sigma`, adding `1e-6 · trace/d · I` (escalating tenfold) until the
/// factorization succeeds and is well conditioned.
fn regularized(sigma: Matrix) -> Result<(Matrix, Cholesky<f64, Dyn>)> {
    let d = sigma.nrows();
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance estimate".into()));
    }
    let sigma = linalg::symmetrize(&sigma);
    let well_conditioned = |c: &Cholesky<f64, Dyn>| {
        let diag = c.l_dirty().diagonal();
        let max = diag.iter().fold(0.0f64, |a, v| a.max(v * v));
        let min = diag.iter().fold(f64::INFINITY, |a, v| a.min(v * v));
        min.is_finite() && min > 0.0 && max <= MAX_PIVOT_RATIO * min
    };
    if let Some(c) = Cholesky::new(sigma.clone()) {
        if well_conditioned(&c) {
            return Ok((sigma, c));
        }
    }
    let trace = sigma.trace();
    let mut ridge = 1e-6 * trace / d as f64;
    // zero or subnormal trace: no usable scale
    if !ridge.is_normal() {
        ridge = 1e-6;
    }
    for _ in 0..MAX_RIDGE_STEPS {
        let candidate = &sigma + Matrix::identity(d, d) * ridge;
        if let Some(c) = Cholesky::new(candidate.clone()) {
            if well_conditioned(&c) {
                return Ok((candidate, c));
            }
        }
        ridge *= 10.0;
    }
    Err(Error::NotPositiveDefinite(format!(
        "covariance still ill-conditioned after ridge {ridge:e}"
    )))
}

fn weighted_covariance(data: &Matrix, weights: &[f64], mean: &Vector, total: f64) -> Matrix {
    let d = data.ncols();
    let mut cov = Matrix::zeros(d, d);
    for (i, row) in data.row_iter().enumerate() {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        let diff = row.transpose() - mean;
        cov.ger(w, &diff, &diff, 1.0);
    }
    cov / total
}

/// k-means++ seeding of `k` means from the rows of `data`.
fn seed_means<R: Rng + ?Sized>(data: &Matrix, k: usize, rng: &mut R) -> Vec<Vector> {
    let n = data.nrows();
    let row = |i: usize| data.row(i).transpose();
    let mut means = vec![row(rng.random_range(0..n))];
    let mut dist: Vec<f64> = (0..n).map(|i| (row(i) - &means[0]).norm_squared()).collect();
    while means.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in dist.iter().enumerate() {
                acc += d;
                if target < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let m = row(pick);
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min((row(i) - &m).norm_squared());
        }
        means.push(m);
    }
    means
}

pub fn fit_gmm_em<R: Rng + ?Sized>(data: &Matrix, k: usize, config: EmConfig, rng: &mut R) -> Result<GmmParams> {
    fit_gmm_em_traced(data, k, config, rng).map(|f| f.params)
}

/// Maximum-likelihood mixture fit by expectation maximization.
pub fn fit_gmm_em_traced<R: Rng + ?Sized>(data: &Matrix, k: usize, config: EmConfig, rng: &mut R) -> Result<EmFit> {
    let (n, d) = data.shape();
    if k == 0 {
        return Err(Error::InvalidHyperparameter("K must be at least 1".into()));
    }
    if n < k {
        return Err(Error::InsufficientData(format!("{n} rows for {k} components")));
    }
    if d == 0 || data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("EM input must be finite and non-empty".into()));
    }

    let ones = vec![1.0; n];
    let grand_mean = data.row_sum().transpose() / n as f64;
    let pooled = weighted_covariance(data, &ones, &grand_mean, n as f64);
    let (pooled, _) = regularized(pooled)?;

    let mut mu = seed_means(data, k, rng);
    let mut pi = vec![1.0 / k as f64; k];
    let mut sigma: Vec<Matrix> = vec![pooled.clone(); k];
    let mut factors: Vec<Cholesky<f64, Dyn>> = sigma
        .iter()
        .map(|s| regularized(s.clone()).map(|r| r.1))
        .collect::<Result<_>>()?;

    let mut trace: Vec<f64> = Vec::new();
    let mut resp = Matrix::zeros(n, k);
    let mut converged = false;
    let log2pi = d as f64 * (2.0 * PI).ln();

    for iter in 0..config.max_iter {
        // E-step
        let mut ll = 0.0;
        let mut terms = vec![0.0; k];
        for i in 0..n {
            let x = data.row(i).transpose();
            for c in 0..k {
                let z = factors[c]
                    .l_dirty()
                    .solve_lower_triangular(&(&x - &mu[c]))
                    .expect("non-singular factor");
                terms[c] = pi[c].ln() - 0.5 * (log2pi + log_det(&factors[c]) + z.norm_squared());
            }
            let lse = log_sum_exp(&terms);
            ll += lse;
            for c in 0..k {
                resp[(i, c)] = (terms[c] - lse).exp();
            }
        }
        let mean_ll = ll / n as f64;
        if let Some(&prev) = trace.last() {
            if (mean_ll - prev).abs() < config.tol {
                trace.push(mean_ll);
                converged = true;
                debug!("EM converged after {iter} iterations, mean log-likelihood {mean_ll}");
                break;
            }
        }
        trace.push(mean_ll);
        if iter + 1 == config.max_iter {
            break;
        }

        // M-step
        for c in 0..k {
            let w: Vec<f64> = resp.column(c).iter().copied().collect();
            let nk: f64 = w.iter().sum();
            pi[c] = nk / n as f64;
            if nk <= 1e-12 * n as f64 {
                // component lost its support; keep its previous shape
                continue;
            }
            let mut m = Vector::zeros(d);
            for (i, row) in data.row_iter().enumerate() {
                m.axpy(w[i], &row.transpose(), 1.0);
            }
            m /= nk;
            let (s, f) = regularized(weighted_covariance(data, &w, &m, nk))?;
            mu[c] = m;
            sigma[c] = s;
            factors[c] = f;
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
    }

    let params = GmmParams::new(pi, mu, sigma)?;
    Ok(EmFit {
        params,
        log_likelihood: trace,
        converged,
    })
}
