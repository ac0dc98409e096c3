//! Federated approximate Bayesian computation for Gaussian mixture models.
//!
//! Sites compress their minority-class data with a locally trained modified
//! autoencoder (`moae`). A central server draws mixture parameters from
//! Dirichlet / Normal-Inverse-Wishart priors, simulates latent batches, and
//! accepts a candidate when the mean of the per-site discrepancies falls
//! under a threshold. The accepted posterior then drives minority-class
//! oversampling, scored by the `evaluation` harness.

pub mod abc;
pub mod dataprep;
pub mod discrepancy;
pub mod error;
pub mod evaluation;
pub mod federation;
pub mod gmm;
pub mod linalg;
pub mod moae;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use gmm::GmmParams;
pub use rng::RngHandle;

/// Dense row-per-sample matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type Vector = nalgebra::DVector<f64>;
