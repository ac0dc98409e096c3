//! In-memory pipeline stages shared by the subcommands and the tests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use fedabc::abc::{abc_rejection, AbcResult};
use fedabc::dataprep::{
    components_for, correlation_filter, partition_by_column, partition_sites, standardize, synth_generate, CsvColumns,
    Dataset, LoadedCsv, StandardizationStats, SynthData,
};
use fedabc::evaluation::{
    oversample_count, run_condition, Condition, EvalConfig, MetricsReport, MetricsRow, SiteFeatures, SplitFeatures,
};
use fedabc::federation::{
    centralized_problem, in_process, posterior_oversample, run_site, Channel, GmmPrior, MessageLog, Server,
    ServerConfig, SiteNode, TcpChannel, TcpHub,
};
use fedabc::linalg::vstack;
use fedabc::moae::{init_moae, train_moae, AdamConfig, LossWeights, MoaeArchitecture, TrainConfig};
use fedabc::samplers::{DirichletAlpha, NiwHyper};
use fedabc::{GmmParams, Matrix, RngHandle, Vector};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{EpsilonConfig, ExperimentConfig, GlobalFeatures, TransportKind};
use crate::streams::{self, Streams};

const MANIFEST: &str = "manifest.json";
const CONNECT_PATIENCE: Duration = Duration::from_secs(30);

/// Type-7 (linear interpolation) sample quantile.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        bail!("quantile of an empty sample");
    }
    if !(0.0..=1.0).contains(&q) {
        bail!("quantile level {q} outside [0, 1]");
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

pub fn generate(cfg: &ExperimentConfig) -> Result<SynthData> {
    let mut streams = Streams::new(cfg.seed);
    let mut spec = cfg.data.synthetic.clone();
    spec.profile = cfg.data.profile.clone();
    Ok(synth_generate(&spec, streams.get(streams::SYNTHETIC))?)
}

/// Features, then the label column, then the site column.
pub fn write_data_csv(data: &SynthData, path: &Path, label: &str, site: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let ds = &data.dataset;
    let mut header = ds.feature_names.clone();
    header.push(label.into());
    header.push(site.into());
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = ds.x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.y[i].to_string());
        rec.push(data.sites[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteManifest {
    pub site_id: u32,
    pub train_file: String,
    pub test_file: String,
    /// `(majority, minority)`.
    pub train_counts: (usize, usize),
    pub test_counts: (usize, usize),
    pub stats: StandardizationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareManifest {
    pub config_hash: String,
    pub seeds: std::collections::BTreeMap<String, u64>,
    pub source: String,
    pub label_column: String,
    pub rows: usize,
    pub features_in: usize,
    pub correlation_threshold: f64,
    pub kept_columns: Vec<usize>,
    pub feature_names: Vec<String>,
    pub train_fraction: f64,
    /// `floor(0.9 · Σ minority training rows)`.
    pub components_rule: usize,
    pub sites: Vec<SiteManifest>,
}

/// One site's standardized training and test data.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSite {
    pub site_id: u32,
    pub train: Dataset,
    pub test: Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub manifest: PrepareManifest,
    pub sites: Vec<PreparedSite>,
}

impl Prepared {
    pub fn input_dim(&self) -> usize {
        self.manifest.kept_columns.len()
    }

    pub fn minority_train_counts(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.train.class_counts().1).collect()
    }
}

/// Correlation filter on the full table, site partition, stratified split
/// and per-site standardization.
pub fn prepare(cfg: &ExperimentConfig, loaded: &LoadedCsv, source: &str) -> Result<Prepared> {
    let mut streams = Streams::new(cfg.seed);
    let data = &loaded.dataset;
    let kept = correlation_filter(&data.x, cfg.data.correlation_threshold)?;
    info!("correlation filter kept {} of {} features", kept.len(), data.dim());
    let filtered = data.select_columns(&kept);
    let rng = streams.get(streams::DATAPREP);
    let partition = match &loaded.sites {
        Some(sites) => partition_by_column(&filtered, sites, cfg.data.train_fraction, rng)?,
        None => partition_sites(&filtered, &cfg.data.profile, cfg.data.train_fraction, rng)?,
    };
    let mut sites = Vec::new();
    let mut manifests = Vec::new();
    for s in partition.sites {
        let (train, test, stats) = standardize(&s.train, &s.test)?;
        manifests.push(SiteManifest {
            site_id: s.site_id,
            train_file: format!("site{}_train.csv", s.site_id),
            test_file: format!("site{}_test.csv", s.site_id),
            train_counts: train.class_counts(),
            test_counts: test.class_counts(),
            stats,
        });
        sites.push(PreparedSite {
            site_id: s.site_id,
            train,
            test,
        });
    }
    let minority: Vec<usize> = sites.iter().map(|s| s.train.class_counts().1).collect();
    let manifest = PrepareManifest {
        config_hash: cfg.hash(),
        seeds: streams.record(),
        source: source.into(),
        label_column: cfg.data.label_column.clone(),
        rows: data.len(),
        features_in: data.dim(),
        correlation_threshold: cfg.data.correlation_threshold,
        feature_names: filtered.feature_names.clone(),
        kept_columns: kept,
        train_fraction: cfg.data.train_fraction,
        components_rule: components_for(&minority),
        sites: manifests,
    };
    Ok(Prepared { manifest, sites })
}

pub fn write_prepared(prepared: &Prepared, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let label = &prepared.manifest.label_column;
    for (site, m) in prepared.sites.iter().zip(&prepared.manifest.sites) {
        site.train.write_csv(&dir.join(&m.train_file), label)?;
        site.test.write_csv(&dir.join(&m.test_file), label)?;
    }
    write_json(&dir.join(MANIFEST), &prepared.manifest)
}

pub fn read_prepared(dir: &Path) -> Result<Prepared> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path)
        .with_context(|| format!("prepared partitions not found: cannot read {}", path.display()))?;
    let manifest: PrepareManifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let cols = CsvColumns {
        label: manifest.label_column.clone(),
        site: None,
        row_id: Some("row_id".into()),
    };
    let load = |file: &str| -> Result<Dataset> {
        let p = dir.join(file);
        Ok(fedabc::dataprep::load_csv(&p, &cols)
            .with_context(|| format!("loading {}", p.display()))?
            .dataset)
    };
    let sites = manifest
        .sites
        .iter()
        .map(|m| {
            Ok(PreparedSite {
                site_id: m.site_id,
                train: load(&m.train_file)?,
                test: load(&m.test_file)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared { manifest, sites })
}

/// Compact single-line JSON, for artifacts too large to pretty-print.
pub fn write_json_compact<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotSummary {
    pub trials: usize,
    pub quantile: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedTheta {
    pub trial: u64,
    pub discrepancy: f64,
    pub params: GmmParams,
}

/// The accepted posterior sample and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorFile {
    pub config_hash: String,
    pub epsilon: f64,
    pub pilot: Option<PilotSummary>,
    pub components: usize,
    pub latent_dim: usize,
    pub trials: usize,
    pub acceptance_rate: f64,
    pub complete: bool,
    pub accepted: Vec<AcceptedTheta>,
}

impl PosteriorFile {
    fn new(
        cfg: &ExperimentConfig,
        components: usize,
        pilot: Option<PilotSummary>,
        result: AbcResult<GmmParams>,
    ) -> Self {
        let accepted = result
            .accepted_trials
            .iter()
            .zip(result.accepted)
            .map(|(&trial, params)| AcceptedTheta {
                trial,
                discrepancy: result.discrepancies[trial as usize],
                params,
            })
            .collect();
        Self {
            config_hash: cfg.hash(),
            epsilon: result.epsilon,
            pilot,
            components,
            latent_dim: cfg.moae.latent_dim,
            trials: result.trials,
            acceptance_rate: result.acceptance_rate,
            complete: result.complete,
            accepted,
        }
    }

    pub fn params(&self) -> Vec<GmmParams> {
        self.accepted.iter().map(|a| a.params.clone()).collect()
    }
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub posterior: PosteriorFile,
    /// Wire log of the federated session; `None` in centralized mode.
    pub log: Option<MessageLog>,
    pub report: MetricsReport,
}

impl RunArtifacts {
    /// 0 when at least one parameter set was accepted, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.posterior.accepted.is_empty() {
            2
        } else {
            0
        }
    }
}

pub fn architecture(cfg: &ExperimentConfig, input_dim: usize) -> Result<MoaeArchitecture> {
    Ok(MoaeArchitecture::with_hidden(
        input_dim,
        cfg.moae.latent_dim,
        cfg.moae.hidden,
    )?)
}

pub fn train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        epochs: cfg.moae.epochs,
        batch_size: cfg.moae.batch_size,
        adam: AdamConfig {
            lr: cfg.moae.lr,
            ..AdamConfig::default()
        },
        weights: LossWeights {
            alpha: cfg.moae.alpha,
            beta: cfg.moae.beta,
        },
    }
}

pub fn prior(cfg: &ExperimentConfig, components: usize) -> Result<GmmPrior> {
    let d = cfg.moae.latent_dim;
    let p = &cfg.prior;
    let niw = NiwHyper::new(
        Vector::zeros(d),
        p.kappa,
        Matrix::identity(d, d) * p.psi_scale,
        p.nu.unwrap_or(d as f64 + 2.0),
    )?;
    Ok(GmmPrior::new(DirichletAlpha::symmetric(components, p.alpha)?, niw)?)
}

struct FederationOutcome {
    nodes: Vec<SiteNode>,
    delivered: Vec<Option<Matrix>>,
    posterior: PosteriorFile,
    log: Option<MessageLog>,
}

struct SiteJob<'a> {
    site: &'a PreparedSite,
    rng: RngHandle,
}

fn server_config(cfg: &ExperimentConfig, prior: GmmPrior) -> ServerConfig {
    let f = &cfg.federation;
    let mut sc = ServerConfig::new(prior, f64::INFINITY, f.target_accepted, f.max_trials);
    sc.round_timeout = f.round_timeout_ms.map(Duration::from_millis);
    sc.retries = f.retries;
    sc
}

/// Pilot (if configured), main inference and posterior deliveries over an
/// already connected server.
fn drive_server<C: Channel>(
    cfg: &ExperimentConfig,
    server: &mut Server<C>,
    components: usize,
    needed: &[(u32, usize)],
    streams: &mut Streams,
) -> Result<PosteriorFile> {
    let f = &cfg.federation;
    let (epsilon, pilot) = match f.epsilon {
        EpsilonConfig::Fixed(e) => (e, None),
        EpsilonConfig::Pilot { trials, quantile: q } => {
            let run = server.infer_with(f64::INFINITY, trials, trials, streams.get(streams::PILOT))?;
            let eps = quantile(&run.discrepancies, q)?;
            info!("pilot of {trials} trials: epsilon = {eps}");
            (
                eps,
                Some(PilotSummary {
                    trials,
                    quantile: q,
                    epsilon: eps,
                }),
            )
        }
    };
    let result = server.infer_with(epsilon, f.target_accepted, f.max_trials, streams.get(streams::INFER))?;
    info!(
        "accepted {} of {} trials (rate {:.4})",
        result.accepted.len(),
        result.trials,
        result.acceptance_rate
    );
    let posterior = PosteriorFile::new(cfg, components, pilot, result);
    if !posterior.accepted.is_empty() {
        let params = posterior.params();
        let deliver = streams.get(streams::DELIVER);
        for &(site_id, n) in needed {
            server.deliver(site_id, &params, n, deliver.child(u64::from(site_id)))?;
        }
    }
    Ok(posterior)
}

fn federate(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    prior: GmmPrior,
    components: usize,
    streams: &mut Streams,
) -> Result<FederationOutcome> {
    let arch = architecture(cfg, prepared.input_dim())?;
    let train = train_config(cfg);
    let hist = cfg.histogram;
    let jobs: Vec<SiteJob> = prepared
        .sites
        .iter()
        .map(|s| SiteJob {
            site: s,
            rng: streams.get(&streams::site_moae(s.site_id)),
        })
        .collect();
    let needed: Vec<(u32, usize)> = prepared
        .sites
        .iter()
        .map(|s| (s.site_id, oversample_count(&s.train.y)))
        .collect();

    if cfg.federation.centralized {
        let nodes = jobs
            .iter()
            .map(|j| {
                SiteNode::train(
                    j.site.site_id,
                    &j.site.train.x,
                    &j.site.train.y,
                    arch,
                    &train,
                    hist,
                    j.rng,
                )
            })
            .collect::<fedabc::Result<Vec<_>>>()?;
        let posterior = centralized(cfg, &nodes, &prior, components, streams)?;
        let delivered = if posterior.accepted.is_empty() {
            vec![None; nodes.len()]
        } else {
            let params = posterior.params();
            let deliver = streams.get(streams::DELIVER);
            needed
                .iter()
                .map(|&(site_id, n)| {
                    Ok(Some(posterior_oversample(
                        &params,
                        n,
                        &mut deliver.child(u64::from(site_id)).rng(),
                    )?))
                })
                .collect::<Result<Vec<_>>>()?
        };
        return Ok(FederationOutcome {
            nodes,
            delivered,
            posterior,
            log: None,
        });
    }

    let sites = jobs.len();
    let server_ends: Vec<Box<dyn Channel>>;
    let site_ends: Vec<Option<Box<dyn Channel>>>;
    let mut hub = None;
    match cfg.federation.transport {
        TransportKind::Inproc => {
            let (a, b) = in_process(sites);
            server_ends = a.into_iter().map(|c| Box::new(c) as Box<dyn Channel>).collect();
            site_ends = b.into_iter().map(|c| Some(Box::new(c) as Box<dyn Channel>)).collect();
        }
        TransportKind::Tcp => {
            let h = TcpHub::bind(cfg.federation.listen.as_str())?;
            info!("tcp hub listening on {}", h.local_addr()?);
            hub = Some(h);
            server_ends = Vec::new();
            site_ends = (0..sites).map(|_| None).collect();
        }
    }
    let connect_to = match &hub {
        Some(h) => Some(cfg.federation.connect.clone().unwrap_or(h.local_addr()?.to_string())),
        None => None,
    };
    let server_cfg = server_config(cfg, prior);

    std::thread::scope(|scope| -> Result<FederationOutcome> {
        let handles: Vec<_> = jobs
            .iter()
            .zip(site_ends)
            .map(|(job, end)| {
                let connect_to = connect_to.clone();
                let train = &train;
                scope.spawn(move || -> Result<_> {
                    let mut channel: Box<dyn Channel> = match end {
                        Some(c) => c,
                        None => {
                            let addr = connect_to.expect("tcp address");
                            Box::new(TcpChannel::connect(addr, CONNECT_PATIENCE)?)
                        }
                    };
                    let s = job.site;
                    Ok(run_site(
                        s.site_id,
                        &s.train.x,
                        &s.train.y,
                        arch,
                        train,
                        hist,
                        &mut channel,
                        job.rng,
                    )?)
                })
            })
            .collect();

        let served = (|| -> Result<(PosteriorFile, MessageLog)> {
            let channels = match &hub {
                Some(h) => h
                    .accept(sites)?
                    .into_iter()
                    .map(|c| Box::new(c) as Box<dyn Channel>)
                    .collect(),
                None => server_ends,
            };
            let mut server = Server::connect(server_cfg, channels)?;
            let posterior = drive_server(cfg, &mut server, components, &needed, streams)?;
            Ok((posterior, server.shutdown()?))
        })();

        let mut nodes = Vec::new();
        let mut delivered = Vec::new();
        let mut site_error = None;
        for h in handles {
            match h.join().map_err(|_| anyhow!("site thread panicked"))? {
                Ok((node, session)) => {
                    nodes.push(node);
                    delivered.push(session.delivered);
                }
                Err(e) => site_error = site_error.or(Some(e)),
            }
        }
        let (posterior, log) = served.context("federated inference")?;
        if let Some(e) = site_error {
            return Err(e.context("site session"));
        }
        Ok(FederationOutcome {
            nodes,
            delivered,
            posterior,
            log: Some(log),
        })
    })
}

fn centralized(
    cfg: &ExperimentConfig,
    nodes: &[SiteNode],
    prior: &GmmPrior,
    components: usize,
    streams: &mut Streams,
) -> Result<PosteriorFile> {
    let f = &cfg.federation;
    let mut ordered: Vec<&SiteNode> = nodes.iter().collect();
    ordered.sort_by_key(|n| n.site_id);
    let encoded: Vec<Matrix> = ordered.iter().map(|n| n.encoded.clone()).collect();
    let (epsilon, pilot) = match f.epsilon {
        EpsilonConfig::Fixed(e) => (e, None),
        EpsilonConfig::Pilot { trials, quantile: q } => {
            let problem = centralized_problem(prior, &encoded, cfg.histogram, f64::INFINITY, trials, trials)?;
            let run = abc_rejection(&problem, streams.get(streams::PILOT))?;
            let eps = quantile(&run.discrepancies, q)?;
            (
                eps,
                Some(PilotSummary {
                    trials,
                    quantile: q,
                    epsilon: eps,
                }),
            )
        }
    };
    let problem = centralized_problem(prior, &encoded, cfg.histogram, epsilon, f.target_accepted, f.max_trials)?;
    let result = abc_rejection(&problem, streams.get(streams::INFER))?;
    Ok(PosteriorFile::new(cfg, components, pilot, result))
}

fn split_features(encode: impl Fn(&Matrix) -> Result<Matrix>, site: &PreparedSite) -> Result<SplitFeatures> {
    Ok(SplitFeatures {
        train_x: encode(&site.train.x)?,
        train_y: site.train.y.clone(),
        test_x: encode(&site.test.x)?,
        test_y: site.test.y.clone(),
    })
}

/// Full run on prepared data: site encoders, federated (or centralized)
/// inference, oversampling and the four-condition evaluation.
pub fn execute(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<RunArtifacts> {
    cfg.validate()?;
    if prepared.sites.is_empty() {
        bail!("prepared data has no sites");
    }
    let mut streams = Streams::new(cfg.seed);
    let components = cfg
        .prior
        .components
        .unwrap_or_else(|| components_for(&prepared.minority_train_counts()));
    if components == 0 {
        bail!("no minority training rows, mixture would have zero components");
    }
    let prior = prior(cfg, components)?;
    info!(
        "{} sites, D = {}, d = {}, K = {components}",
        prepared.sites.len(),
        prepared.input_dim(),
        cfg.moae.latent_dim
    );
    let fed = federate(cfg, prepared, prior, components, &mut streams)?;

    let global_model = match cfg.evaluation.global_features {
        GlobalFeatures::Latent => {
            let arch = architecture(cfg, prepared.input_dim())?;
            let xs: Vec<&Matrix> = prepared.sites.iter().map(|s| &s.train.x).collect();
            let x = vstack(&xs)?;
            let y: Vec<u8> = prepared.sites.iter().flat_map(|s| s.train.y.iter().copied()).collect();
            let rng = streams.get(streams::GLOBAL_MOAE);
            let mut model = init_moae(arch, rng.child(0));
            train_moae(&mut model, &x, &y, &train_config(cfg), &mut rng.child(1).rng())?;
            Some(model)
        }
        GlobalFeatures::Raw => None,
    };

    let features = prepared
        .sites
        .iter()
        .zip(&fed.nodes)
        .zip(&fed.delivered)
        .map(|((site, node), delivered)| {
            let local = split_features(|x| Ok(node.model.encode(x)?), site)?;
            let global = match &global_model {
                Some(m) => split_features(|x| Ok(m.encode(x)?), site)?,
                None => split_features(|x| Ok(x.clone()), site)?,
            };
            Ok(SiteFeatures {
                site_id: site.site_id,
                local,
                global: Some(global),
                abc_rows: delivered.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let eval_cfg = EvalConfig {
        logreg: cfg.evaluation.logreg,
        em: cfg.evaluation.em,
    };
    let eval_rng = streams.get(streams::EVALUATION);
    let mut rows: Vec<MetricsRow> = Vec::new();
    for (i, condition) in Condition::ALL.into_iter().enumerate() {
        if condition == Condition::Abc && fed.posterior.accepted.is_empty() {
            warn!("no accepted parameter sets; skipping the ABC condition");
            continue;
        }
        let mut batch = run_condition(condition, &features, &eval_cfg, eval_rng.child(i as u64))?;
        if condition == Condition::Abc {
            batch.iter_mut().for_each(|r| r.threshold = Some(fed.posterior.epsilon));
        }
        rows.extend(batch);
    }
    let report = MetricsReport {
        rows,
        seeds: streams.record(),
        config_hash: cfg.hash(),
    };
    Ok(RunArtifacts {
        posterior: fed.posterior,
        log: fed.log,
        report,
    })
}

/// Output file locations of a run.
pub struct RunPaths {
    pub resolved_config: PathBuf,
    pub posterior: PathBuf,
    pub messages: PathBuf,
    pub report_txt: PathBuf,
    pub report_json: PathBuf,
}

impl RunPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            resolved_config: dir.join("resolved_config.json"),
            posterior: dir.join("posterior.json"),
            messages: dir.join("messages.jsonl"),
            report_txt: dir.join("report.txt"),
            report_json: dir.join("report.json"),
        }
    }
}

pub fn write_run(cfg: &ExperimentConfig, artifacts: &RunArtifacts) -> Result<RunPaths> {
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let paths = RunPaths::in_dir(&cfg.out_dir);
    write_json(&paths.resolved_config, cfg)?;
    write_json_compact(&paths.posterior, &artifacts.posterior)?;
    if let Some(log) = &artifacts.log {
        let file =
            fs::File::create(&paths.messages).with_context(|| format!("creating {}", paths.messages.display()))?;
        log.write_jsonl(std::io::BufWriter::new(file))?;
    }
    fs::write(&paths.report_txt, artifacts.report.render_text())?;
    write_json(&paths.report_json, &artifacts.report)?;
    Ok(paths)
}
