//! Federated rejection ABC over a Gaussian-mixture prior.
//!
//! The server samples θ = (π, μ, Σ), generates `N = Σ n_i` latent rows, splits
//! them by the sites' registered minority counts and sends each site its
//! slice. Sites answer with a single scalar discrepancy; a candidate is kept
//! when the mean reply is strictly below ε. Sites never send data matrices.

mod log;
mod server;
mod site;
pub mod transport;
pub mod wire;

pub use self::log::{Direction, LogEntry, MessageLog};
pub use server::{run_server, Server, ServerConfig, SiteRegistration};
pub use site::{run_site, SiteNode, SiteSessionLog};
pub use transport::{in_process, in_process_pair, Channel, InProcessChannel, TcpChannel, TcpHub};
pub use wire::WireMessage;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::abc::AbcProblem;
use crate::discrepancy::{site_similarity, HistogramSpec};
use crate::gmm::{sample_gmm, GmmParams};
use crate::linalg::vstack;
use crate::rng::StreamRng;
use crate::samplers::{sample_dirichlet, sample_niw, DirichletAlpha, NiwHyper};
use crate::{Error, Matrix, Result};

/// Dirichlet prior on weights and NIW prior on each component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmPrior {
    pub alpha: DirichletAlpha,
    pub niw: NiwHyper,
}

impl GmmPrior {
    pub fn new(alpha: DirichletAlpha, niw: NiwHyper) -> Result<Self> {
        niw.validate()?;
        Ok(Self { alpha, niw })
    }

    /// `α = (1, …, 1)` with the weakly informative NIW of dimension `d`.
    pub fn default_for(components: usize, d: usize) -> Result<Self> {
        Self::new(
            DirichletAlpha::symmetric(components, 1.0)?,
            NiwHyper::weakly_informative(d),
        )
    }

    pub fn components(&self) -> usize {
        self.alpha.len()
    }

    pub fn dim(&self) -> usize {
        self.niw.dim()
    }

    /// `π ~ Dir(α)`, then `(μ_k, Σ_k) ~ NIW` for each component in order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GmmParams> {
        let pi = sample_dirichlet(&self.alpha, rng);
        let mut mu = Vec::with_capacity(pi.len());
        let mut sigma = Vec::with_capacity(pi.len());
        for _ in 0..pi.len() {
            let (m, s) = sample_niw(&self.niw, rng)?;
            mu.push(m);
            sigma.push(s);
        }
        GmmParams::new(pi, mu, sigma)
    }
}

/// Draws one latent row per request from the posterior predictive: θ uniform
/// over the accepted list, then one row of `sample_gmm(θ, 1)`.
pub fn posterior_oversample<R: Rng + ?Sized>(accepted: &[GmmParams], n_needed: usize, rng: &mut R) -> Result<Matrix> {
    let first = accepted.first().ok_or(Error::NoPosterior)?;
    let d = first.dim();
    let prepared: Vec<_> = accepted.iter().map(GmmParams::prepare).collect();
    let mut out = Matrix::zeros(n_needed, d);
    for i in 0..n_needed {
        let pick = rng.random_range(0..prepared.len());
        let (row, _) = prepared[pick].sample(1, rng);
        out.row_mut(i).copy_from(&row.row(0));
    }
    Ok(out)
}

/// Splits `rows` into consecutive blocks of the given sizes.
pub fn split_rows(rows: &Matrix, sizes: &[usize]) -> Result<Vec<Matrix>> {
    if sizes.iter().sum::<usize>() != rows.nrows() {
        return Err(Error::Shape(format!(
            "cannot split {} rows into {:?}",
            rows.nrows(),
            sizes
        )));
    }
    let mut at = 0;
    Ok(sizes
        .iter()
        .map(|&n| {
            let block = rows.rows(at, n).into_owned();
            at += n;
            block
        })
        .collect())
}

/// Mean of the per-site replies, summed in registration order.
pub fn mean_discrepancy(phis: &[f64]) -> f64 {
    phis.iter().sum::<f64>() / phis.len() as f64
}

/// Centralized ABC over the same prior, simulator and discrepancy the
/// federation uses, with all sites' encodings available in one place.
///
/// `encoded` must be listed in registration (ascending site id) order.
pub fn centralized_problem<'a>(
    prior: &'a GmmPrior,
    encoded: &[Matrix],
    histogram: HistogramSpec,
    epsilon: f64,
    target_accepted: usize,
    max_trials: usize,
) -> Result<AbcProblem<'a, GmmParams, Matrix, Matrix>> {
    let sizes: Vec<usize> = encoded.iter().map(Matrix::nrows).collect();
    let total: usize = sizes.iter().sum();
    let observed = vstack(&encoded.iter().collect::<Vec<_>>())?;
    let split = sizes.clone();
    Ok(AbcProblem {
        prior: Box::new(move |r: &mut StreamRng| prior.sample(r)),
        simulator: Box::new(move |theta: &GmmParams, r: &mut StreamRng| Ok(sample_gmm(theta, total, r).0)),
        summary: Box::new(|x: &Matrix| Ok(x.clone())),
        discrepancy: Box::new(move |gen: &Matrix, obs: &Matrix| {
            let gens = split_rows(gen, &split)?;
            let encs = split_rows(obs, &split)?;
            let phis = encs
                .iter()
                .zip(&gens)
                .map(|(e, g)| site_similarity(e, g, &histogram))
                .collect::<Result<Vec<_>>>()?;
            Ok(mean_discrepancy(&phis))
        }),
        observed,
        epsilon,
        target_accepted,
        max_trials,
    })
}
