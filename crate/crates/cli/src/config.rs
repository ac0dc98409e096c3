//! Experiment configuration: a JSON document whose every field has a default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fedabc::dataprep::{SiteProfile, SynthSpec, DEFAULT_TRAIN_FRACTION};
use fedabc::discrepancy::HistogramSpec;
use fedabc::evaluation::LogregConfig;
use fedabc::gmm::EmConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub data: DataConfig,
    pub moae: MoaeConfig,
    pub prior: PriorConfig,
    pub federation: FederationConfig,
    pub histogram: HistogramSpec,
    pub evaluation: EvaluationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            data: DataConfig::default(),
            moae: MoaeConfig::default(),
            prior: PriorConfig::default(),
            federation: FederationConfig::default(),
            histogram: HistogramSpec::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Input table; `None` means `<out_dir>/data.csv` as written by gen-data.
    pub csv: Option<PathBuf>,
    pub label_column: String,
    /// Column assigning rows to sites. Without it rows are assigned
    /// randomly to match `profile`.
    pub site_column: Option<String>,
    /// Prepared partitions; `None` means `<out_dir>/prepared`.
    pub prepared_dir: Option<PathBuf>,
    pub correlation_threshold: f64,
    pub train_fraction: f64,
    pub profile: Vec<SiteProfile>,
    pub synthetic: SynthSpec,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            csv: None,
            label_column: "label".into(),
            site_column: Some("site".into()),
            prepared_dir: None,
            correlation_threshold: 0.8,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            profile: SiteProfile::DEFAULT.to_vec(),
            synthetic: SynthSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoaeConfig {
    pub latent_dim: usize,
    pub hidden: [usize; 2],
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MoaeConfig {
    fn default() -> Self {
        Self {
            latent_dim: 24,
            hidden: [64, 32],
            epochs: 300,
            lr: 1e-3,
            batch_size: None,
            alpha: 1.0,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// Mixture components; `None` applies `floor(0.9 · Σ minority)`.
    pub components: Option<usize>,
    /// Symmetric Dirichlet concentration.
    pub alpha: f64,
    pub kappa: f64,
    /// Inverse-Wishart scale is `psi_scale · I`.
    pub psi_scale: f64,
    /// Degrees of freedom; `None` means `d + 2`.
    pub nu: Option<f64>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            components: None,
            alpha: 1.0,
            kappa: 1.0,
            psi_scale: 1.0,
            nu: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonConfig {
    Fixed(f64),
    /// Quantile of the discrepancies of a prior-only pilot run.
    Pilot {
        trials: usize,
        quantile: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    Inproc,
    Tcp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FederationConfig {
    pub epsilon: EpsilonConfig,
    /// Target number of accepted parameter sets.
    pub target_accepted: usize,
    pub max_trials: usize,
    pub transport: TransportKind,
    /// Address the TCP hub binds.
    pub listen: String,
    /// Address sites dial; `None` uses the hub's bound address.
    pub connect: Option<String>,
    pub round_timeout_ms: Option<u64>,
    pub retries: u32,
    /// Skip the transport and run rejection directly on pooled encodings.
    pub centralized: bool,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            epsilon: EpsilonConfig::Pilot {
                trials: 2000,
                quantile: 0.05,
            },
            target_accepted: 100,
            max_trials: 200_000,
            transport: TransportKind::Inproc,
            listen: "127.0.0.1:0".into(),
            connect: None,
            round_timeout_ms: None,
            retries: 3,
            centralized: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalFeatures {
    /// Pooled moAE latents.
    Latent,
    /// Standardized input features.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub logreg: LogregConfig,
    pub em: EmConfig,
    pub global_features: GlobalFeatures,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            logreg: LogregConfig::default(),
            em: EmConfig::default(),
            global_features: GlobalFeatures::Latent,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        if !(d.correlation_threshold > 0.0 && d.correlation_threshold <= 1.0) {
            bail!("data.correlation_threshold must lie in (0, 1]");
        }
        if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
            bail!("data.train_fraction must lie in (0, 1)");
        }
        if d.profile.is_empty() {
            bail!("data.profile needs at least one site");
        }
        let m = &self.moae;
        if m.latent_dim == 0 || m.hidden.contains(&0) {
            bail!("moae widths must be positive");
        }
        if !(m.lr > 0.0 && m.alpha >= 0.0 && m.beta >= 0.0) {
            bail!("moae.lr must be positive and loss weights non-negative");
        }
        let p = &self.prior;
        if p.components == Some(0) || !(p.alpha > 0.0 && p.kappa > 0.0 && p.psi_scale > 0.0) {
            bail!("prior hyperparameters must be positive");
        }
        if let Some(nu) = p.nu {
            if nu.is_nan() || nu <= m.latent_dim as f64 - 1.0 {
                bail!("prior.nu must exceed latent_dim - 1");
            }
        }
        let f = &self.federation;
        match f.epsilon {
            EpsilonConfig::Fixed(e) if e.is_nan() || e <= 0.0 => bail!("federation.epsilon must be positive"),
            EpsilonConfig::Pilot { trials, quantile } if trials == 0 || !(0.0..=1.0).contains(&quantile) => {
                bail!("pilot needs trials >= 1 and quantile in [0, 1]")
            }
            _ => {}
        }
        if f.target_accepted == 0 || f.max_trials < f.target_accepted {
            bail!("federation needs max_trials >= target_accepted >= 1");
        }
        self.histogram.validate().context("histogram")?;
        Ok(())
    }

    pub fn data_csv(&self) -> PathBuf {
        self.data.csv.clone().unwrap_or_else(|| self.out_dir.join("data.csv"))
    }

    pub fn prepared_dir(&self) -> PathBuf {
        self.data
            .prepared_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("prepared"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the canonical JSON form without the seed, output
    /// locations and transport settings, so replicate runs of one experiment
    /// share a hash whichever way the sites were wired.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.seed = 0;
        c.data.prepared_dir = None;
        let defaults = FederationConfig::default();
        let f = &mut c.federation;
        f.transport = defaults.transport;
        f.listen = defaults.listen;
        f.connect = None;
        f.round_timeout_ms = None;
        f.retries = defaults.retries;
        f.centralized = false;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let c: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn epsilon_forms() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"federation": {"epsilon": {"fixed": 8.0}}}"#).unwrap();
        assert_eq!(c.federation.epsilon, EpsilonConfig::Fixed(8.0));
        let mut bad = c.clone();
        bad.federation.epsilon = EpsilonConfig::Fixed(0.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn resolved_round_trip() {
        let c = ExperimentConfig::default();
        let back: ExperimentConfig = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn hash_ignores_seed_locations_and_wiring() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out_dir = "elsewhere".into();
        b.seed = 9;
        assert_eq!(a.hash(), b.hash());
        b.federation.transport = TransportKind::Tcp;
        b.federation.centralized = true;
        assert_eq!(a.hash(), b.hash());
        b.moae.epochs = 10;
        assert_ne!(a.hash(), b.hash());
    }
}
