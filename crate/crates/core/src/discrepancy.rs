//! Site-level similarity between an encoded and a generated latent batch:
//! index-paired squared Euclidean distance plus a histogram estimate of
//! `D_KL(enc || gen)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

/// A latent batch tagged with the site it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBatch {
    pub site: u32,
    pub values: Matrix,
}

impl LatentBatch {
    pub fn new(site: u32, values: Matrix) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("latent batch of site {site}")));
        }
        Ok(Self { site, values })
    }
}

/// Binning used by the per-dimension KL estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    /// Mass added to every bin before renormalizing.
    pub epsilon: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bins: 16,
            lo: -3.0,
            hi: 3.0,
            epsilon: 1e-6,
        }
    }
}

impl HistogramSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::Config("histogram needs at least 2 bins".into()));
        }
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo >= self.hi {
            return Err(Error::Config("histogram range must satisfy lo < hi".into()));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config("histogram smoothing must be positive".into()));
        }
        Ok(())
    }

    fn bin(&self, v: f64) -> usize {
        let v = v.clamp(self.lo, self.hi);
        let pos = (v - self.lo) / (self.hi - self.lo) * self.bins as f64;
        (pos.floor() as usize).min(self.bins - 1)
    }

    /// Smoothed, normalized bin masses of one column.
    fn masses<'a>(&self, column: impl Iterator<Item = &'a f64>) -> Vec<f64> {
        let mut counts = vec![0.0; self.bins];
        let mut n = 0usize;
        for &v in column {
            counts[self.bin(v)] += 1.0;
            n += 1;
        }
        let total = 1.0 + self.bins as f64 * self.epsilon;
        counts.iter().map(|c| (c / n as f64 + self.epsilon) / total).collect()
    }
}

/// `Σ_j ||enc_j − gen_j||²` with rows paired by index.
pub fn euclidean_disc(enc: &Matrix, gen: &Matrix) -> Result<f64> {
    if enc.shape() != gen.shape() {
        return Err(Error::Shape(format!(
            "encoded batch is {:?}, generated batch is {:?}",
            enc.shape(),
            gen.shape()
        )));
    }
    Ok(enc.iter().zip(gen.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Per-dimension histogram `D_KL(enc || gen)`, summed over dimensions.
pub fn kl_empirical(enc: &Matrix, gen: &Matrix, spec: &HistogramSpec) -> Result<f64> {
    spec.validate()?;
    if enc.nrows() == 0 || gen.nrows() == 0 {
        return Err(Error::EmptyInput("KL needs non-empty batches".into()));
    }
    if enc.ncols() != gen.ncols() {
        return Err(Error::Shape(format!(
            "latent dimensions differ: {} vs {}",
            enc.ncols(),
            gen.ncols()
        )));
    }
    let mut total = 0.0;
    for j in 0..enc.ncols() {
        let p = spec.masses(enc.column(j).iter());
        let q = spec.masses(gen.column(j).iter());
        total += p.iter().zip(&q).map(|(p, q)| p * (p / q).ln()).sum::<f64>();
    }
    // rounding can leave -1e-17 on identical histograms
    Ok(total.max(0.0))
}

/// Discrepancy `φ` a site reports for one candidate batch.
pub fn site_similarity(enc: &Matrix, gen: &Matrix, spec: &HistogramSpec) -> Result<f64> {
    Ok(euclidean_disc(enc, gen)? + kl_empirical(enc, gen, spec)?)
}
