//! Seeded draws from the priors placed on mixture parameters: Dirichlet
//! weights and Normal-Inverse-Wishart component means/covariances.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, is_symmetric, symmetrize, SYMMETRY_TOL};
use crate::{Error, Matrix, Result, Vector};

/// Dirichlet concentration, one entry per mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirichletAlpha(Vec<f64>);

impl DirichletAlpha {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidHyperparameter("Dirichlet alpha is empty".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidHyperparameter(format!(
                "Dirichlet alpha entries must be positive, got {a}"
            )));
        }
        Ok(Self(alpha))
    }

    /// Symmetric concentration `(value, …, value)` of length `k`.
    pub fn symmetric(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Normal-Inverse-Wishart hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiwHyper {
    /// Location of the component means.
    #[serde(with = "crate::linalg::vector")]
    pub m: Vector,
    /// Precision scaling of the mean given the covariance.
    pub kappa: f64,
    /// Inverse-Wishart scale matrix.
    #[serde(with = "crate::linalg::rows")]
    pub psi: Matrix,
    /// Inverse-Wishart degrees of freedom.
    pub nu: f64,
}

impl NiwHyper {
    pub fn new(m: Vector, kappa: f64, psi: Matrix, nu: f64) -> Result<Self> {
        let h = Self { m, kappa, psi, nu };
        h.validate()?;
        Ok(h)
    }

    /// `m = 0`, `κ = 1`, `Ψ = I`, `ν = d + 2`.
    pub fn weakly_informative(d: usize) -> Self {
        Self {
            m: Vector::zeros(d),
            kappa: 1.0,
            psi: Matrix::identity(d, d),
            nu: d as f64 + 2.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.m.len();
        if d == 0 {
            return Err(Error::InvalidHyperparameter("NIW location is empty".into()));
        }
        if self.psi.nrows() != d || self.psi.ncols() != d {
            return Err(Error::Shape(format!(
                "psi is {}x{}, expected {d}x{d}",
                self.psi.nrows(),
                self.psi.ncols()
            )));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        check_dof(self.nu, d)?;
        if !is_symmetric(&self.psi, SYMMETRY_TOL) {
            return Err(Error::InvalidHyperparameter("psi is not symmetric".into()));
        }
        cholesky(&self.psi)?;
        Ok(())
    }
}

fn check_dof(nu: f64, d: usize) -> Result<()> {
    if !(nu.is_finite() && nu > d as f64 - 1.0) {
        return Err(Error::InvalidHyperparameter(format!(
            "degrees of freedom {nu} must exceed d - 1 = {}",
            d as f64 - 1.0
        )));
    }
    Ok(())
}

/// `ln X` for `X ~ Gamma(shape, 1)`.
///
/// Shapes below one are boosted, `G(a) = G(a + 1) · U^{1/a}`, and kept in log
/// space so that tiny shapes do not underflow to an all-zero simplex.
fn ln_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("shape validated positive");
        g.sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("shape validated positive");
        let u: f64 = rng.random::<f64>();
        // u == 0 has probability 2^-53; nudge it to keep the log finite.
        let u = if u > 0.0 { u } else { f64::MIN_POSITIVE };
        g.sample(rng).ln() + u.ln() / shape
    }
}

/// One draw from `Dir(alpha)` via normalized Gamma variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &DirichletAlpha, rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = alpha.0.iter().map(|&a| ln_gamma_draw(a, rng)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// `n` rows drawn i.i.d. from `N(m, sigma)`.
pub fn sample_mvn<R: Rng + ?Sized>(m: &Vector, sigma: &Matrix, n: usize, rng: &mut R) -> Result<Matrix> {
    let d = m.len();
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::Shape(format!(
            "covariance is {}x{}, mean has length {d}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let chol = cholesky(sigma)?;
    let l = chol.l();
    let mut out = Matrix::zeros(n, d);
    let mut z = Vector::zeros(d);
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let row = m + &l * &z;
        for j in 0..d {
            out[(i, j)] = row[j];
        }
    }
    Ok(out)
}

/// One draw from `W⁻¹(nu, psi)`.
///
/// Draws `W ~ Wishart(nu, psi⁻¹)` with the Bartlett decomposition
/// `W = (L A)(L A)ᵀ` and returns `W⁻¹`. Real-valued `nu` is handled through
/// the chi-square diagonal of `A`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(nu: f64, psi: &Matrix, rng: &mut R) -> Result<Matrix> {
    let d = psi.nrows();
    if d == 0 || psi.ncols() != d {
        return Err(Error::Shape("psi must be a non-empty square matrix".into()));
    }
    check_dof(nu, d)?;
    let psi_chol = cholesky(psi)?;
    let psi_inv = symmetrize(&psi_chol.inverse());
    let l = cholesky(&psi_inv)?.l();

    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        let chi = ChiSquared::new(nu - i as f64).map_err(|e| Error::InvalidHyperparameter(e.to_string()))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let t = l * a;
    let t_inv = t
        .solve_lower_triangular(&Matrix::identity(d, d))
        .ok_or_else(|| Error::NotPositiveDefinite("singular Bartlett factor".into()))?;
    Ok(symmetrize(&(t_inv.transpose() * t_inv)))
}

/// `(mu, sigma)` from the NIW prior: `sigma ~ W⁻¹(nu, psi)` first, then
/// `mu ~ N(m, sigma / kappa)`.
pub fn sample_niw<R: Rng + ?Sized>(hyper: &NiwHyper, rng: &mut R) -> Result<(Vector, Matrix)> {
    let sigma = sample_inverse_wishart(hyper.nu, &hyper.psi, rng)?;
    let mu_row = sample_mvn(&hyper.m, &(&sigma / hyper.kappa), 1, rng)?;
    let mu = mu_row.row(0).transpose();
    Ok((mu, sigma))
}
