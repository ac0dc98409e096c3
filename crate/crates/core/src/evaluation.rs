//! Validation classifier, F1-maximizing cut-off, confusion metrics and the
//! four-condition comparison grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::federation::posterior_oversample;
use crate::gmm::{fit_gmm_em, EmConfig};
use crate::linalg::vstack;
use crate::moae::sigmoid;
use crate::{Error, GmmParams, Matrix, Result, RngHandle, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogregConfig {
    pub iters: usize,
    pub lr: f64,
    pub l2: f64,
}

impl Default for LogregConfig {
    fn default() -> Self {
        Self {
            iters: 2000,
            lr: 0.1,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LogregConfig,
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        let w = Vector::from_column_slice(&self.weights);
        (x * w).iter().map(|z| sigmoid(z + self.bias)).collect()
    }
}

fn logreg_loss(x: &Matrix, y: &Vector, w: &Vector, b: f64, l2: f64) -> f64 {
    let n = x.nrows() as f64;
    let z = x * w;
    let data: f64 = z
        .iter()
        .zip(y.iter())
        .map(|(&zi, &yi)| {
            let zi = zi + b;
            // log(1 + e^z) - y z, stable in both tails
            zi.max(0.0) + (-zi.abs()).exp().ln_1p() - yi * zi
        })
        .sum();
    data / n + 0.5 * l2 * w.norm_squared()
}

/// Full-batch gradient descent on the L2-regularized log-loss. A step that
/// raises the loss is discarded and the learning rate halved, so the loss
/// trace never increases.
pub fn train_logreg(x: &Matrix, y: &[u8], cfg: LogregConfig) -> Result<LogisticModel> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyInput("logistic regression needs data".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic regression input".into()));
    }
    if !(cfg.lr > 0.0 && cfg.l2 >= 0.0) {
        return Err(Error::InvalidHyperparameter(
            "lr must be positive and l2 non-negative".into(),
        ));
    }
    let n = x.nrows() as f64;
    let yv = Vector::from_iterator(y.len(), y.iter().map(|&v| f64::from(v)));
    let mut w = Vector::zeros(x.ncols());
    let mut b = 0.0;
    let mut lr = cfg.lr;
    let mut loss = logreg_loss(x, &yv, &w, b, cfg.l2);
    for _ in 0..cfg.iters {
        let p = (x * &w).map(|z| sigmoid(z + b));
        let r = p - &yv;
        let gw = x.tr_mul(&r) / n + &w * cfg.l2;
        let gb = r.sum() / n;
        loop {
            let w_new = &w - &gw * lr;
            let b_new = b - lr * gb;
            let l_new = logreg_loss(x, &yv, &w_new, b_new, cfg.l2);
            if !l_new.is_finite() {
                return Err(Error::NonFinite("logistic regression loss".into()));
            }
            if l_new <= loss {
                w = w_new;
                b = b_new;
                loss = l_new;
                break;
            }
            lr *= 0.5;
            if lr < 1e-12 {
                break;
            }
        }
        if lr < 1e-12 {
            break;
        }
    }
    Ok(LogisticModel {
        weights: w.iter().copied().collect(),
        bias: b,
        config: cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(pred: &[u8], y: &[u8]) -> Self {
        let mut c = Self::default();
        for (&p, &t) in pred.iter().zip(y) {
            match (p, t) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fp += 1,
                (_, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        c
    }

    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

/// Which rates hit a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub specificity: bool,
    pub f1: bool,
}

impl Degenerate {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.specificity || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
    pub degenerate: Degenerate,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// F1 from precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn compute_metrics(pred: &[u8], y: &[u8]) -> Result<Metrics> {
    if pred.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            pred.len(),
            y.len()
        )));
    }
    let c = Confusion::tally(pred, y);
    let (accuracy, _) = ratio(c.tp + c.tn, y.len());
    let (recall, d_recall) = ratio(c.tp, c.tp + c.fn_);
    let (specificity, d_spec) = ratio(c.tn, c.tn + c.fp);
    let (precision, d_prec) = ratio(c.tp, c.tp + c.fp);
    let f1 = f1_score(precision, recall);
    Ok(Metrics {
        accuracy,
        sensitivity: recall,
        specificity,
        precision,
        recall,
        f1,
        confusion: c,
        degenerate: Degenerate {
            precision: d_prec,
            recall: d_recall,
            specificity: d_spec,
            f1: precision + recall == 0.0,
        },
    })
}

pub fn apply_cutoff(probs: &[f64], cutoff: f64) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(p >= cutoff)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub value: f64,
    pub f1: f64,
}

/// Scans every distinct probability as a candidate cut-off for the rule
/// `p >= c`, keeping the first (smallest) maximizer of training F1.
pub fn select_cutoff(probs: &[f64], y: &[u8]) -> Result<Cutoff> {
    if probs.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} probabilities for {} labels",
            probs.len(),
            y.len()
        )));
    }
    if !y.contains(&1) {
        return Err(Error::NoPositiveLabels);
    }
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("probabilities".into()));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    // sweep from the highest cut-off down, tracking the confusion counts
    let positives = y.iter().filter(|&&v| v == 1).count();
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: y.len() - positives,
        fn_: positives,
    };
    let mut best: Option<Cutoff> = None;
    let mut i = 0;
    while i < order.len() {
        let value = probs[order[i]];
        while i < order.len() && probs[order[i]] == value {
            if y[order[i]] == 1 {
                c.tp += 1;
                c.fn_ -= 1;
            } else {
                c.fp += 1;
                c.tn -= 1;
            }
            i += 1;
        }
        let f1 = c.f1();
        if best.is_none_or(|b| f1 >= b.f1) {
            best = Some(Cutoff { value, f1 });
        }
    }
    Ok(best.expect("non-empty because a positive label exists"))
}

/// Rows the minority class needs to match the majority count.
pub fn oversample_count(y: &[u8]) -> usize {
    let minor = y.iter().filter(|&&v| v == 1).count();
    (y.len() - minor).saturating_sub(minor)
}

/// Local mixture components for the OS baseline: `floor(0.9 · n)`, at least 1.
pub fn local_components(minority_rows: usize) -> usize {
    (9 * minority_rows / 10).max(1)
}

/// Fits a mixture to the local minority latents and samples `n_needed` rows.
pub fn oversample_local_gmm(
    minority: &Matrix,
    k_local: usize,
    n_needed: usize,
    em: EmConfig,
    rng: RngHandle,
) -> Result<Matrix> {
    if n_needed == 0 {
        return Ok(Matrix::zeros(0, minority.ncols()));
    }
    let params = fit_gmm_em(minority, k_local, em, &mut rng.child(0).rng())?;
    let (rows, _) = params.prepare().sample(n_needed, &mut rng.child(1).rng());
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    Global,
    Raw,
    #[serde(rename = "OS")]
    Os,
    #[serde(rename = "ABC")]
    Abc,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::Global, Condition::Raw, Condition::Os, Condition::Abc];

    pub fn column_label(&self, site_id: u32) -> String {
        match self {
            Condition::Global => format!("Global Site {site_id}"),
            other => format!("Site {site_id} {other}"),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Global => "Global",
            Condition::Raw => "Raw",
            Condition::Os => "OS",
            Condition::Abc => "ABC",
        })
    }
}

/// One site's classification data in some feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFeatures {
    pub train_x: Matrix,
    pub train_y: Vec<u8>,
    pub test_x: Matrix,
    pub test_y: Vec<u8>,
}

impl SplitFeatures {
    pub fn minority_train(&self) -> Matrix {
        let idx: Vec<usize> = (0..self.train_y.len()).filter(|&i| self.train_y[i] == 1).collect();
        crate::linalg::select_rows(&self.train_x, &idx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteFeatures {
    pub site_id: u32,
    /// Encoded with the site's own moAE.
    pub local: SplitFeatures,
    /// Encoded with the pooled moAE, or raw features in raw-global mode.
    pub global: Option<SplitFeatures>,
    /// Minority rows delivered from the federated posterior.
    pub abc_rows: Option<Matrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    pub logreg: LogregConfig,
    pub em: EmConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub site_id: u32,
    pub condition: Condition,
    pub cutoff: f64,
    pub train_f1: f64,
    /// ABC acceptance threshold, only for the ABC condition.
    #[serde(default)]
    pub threshold: Option<f64>,
    pub metrics: Metrics,
}

fn fit_and_score(train_x: &Matrix, train_y: &[u8], cfg: &EvalConfig) -> Result<(LogisticModel, Cutoff)> {
    let model = train_logreg(train_x, train_y, cfg.logreg)?;
    let cut = select_cutoff(&model.predict_proba(train_x), train_y)?;
    Ok((model, cut))
}

fn score_site(
    site_id: u32,
    condition: Condition,
    model: &LogisticModel,
    cut: Cutoff,
    split: &SplitFeatures,
) -> Result<MetricsRow> {
    let pred = apply_cutoff(&model.predict_proba(&split.test_x), cut.value);
    Ok(MetricsRow {
        site_id,
        condition,
        cutoff: cut.value,
        train_f1: cut.f1,
        threshold: None,
        metrics: compute_metrics(&pred, &split.test_y)?,
    })
}

fn augmented(split: &SplitFeatures, extra: &Matrix) -> Result<(Matrix, Vec<u8>)> {
    if extra.nrows() > 0 && extra.ncols() != split.train_x.ncols() {
        return Err(Error::Shape(format!(
            "oversampled rows have {} columns, features have {}",
            extra.ncols(),
            split.train_x.ncols()
        )));
    }
    let x = vstack(&[&split.train_x, extra])?;
    let mut y = split.train_y.clone();
    y.extend(std::iter::repeat_n(1u8, extra.nrows()));
    Ok((x, y))
}

/// Evaluates one condition at every site. The cut-off is always chosen on the
/// condition's own training data.
pub fn run_condition(
    condition: Condition,
    sites: &[SiteFeatures],
    cfg: &EvalConfig,
    rng: RngHandle,
) -> Result<Vec<MetricsRow>> {
    match condition {
        Condition::Global => {
            let splits = sites
                .iter()
                .map(|s| {
                    s.global
                        .as_ref()
                        .ok_or_else(|| Error::MissingArtifact(format!("global features for site {}", s.site_id)))
                })
                .collect::<Result<Vec<_>>>()?;
            let xs: Vec<&Matrix> = splits.iter().map(|s| &s.train_x).collect();
            let x = vstack(&xs)?;
            let y: Vec<u8> = splits.iter().flat_map(|s| s.train_y.iter().copied()).collect();
            let (model, cut) = fit_and_score(&x, &y, cfg)?;
            sites
                .iter()
                .zip(splits)
                .map(|(s, split)| score_site(s.site_id, condition, &model, cut, split))
                .collect()
        }
        Condition::Raw | Condition::Os | Condition::Abc => sites
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let split = &s.local;
                let needed = oversample_count(&split.train_y);
                let extra = match condition {
                    Condition::Raw => Matrix::zeros(0, split.train_x.ncols()),
                    Condition::Os => {
                        let minority = split.minority_train();
                        let k = local_components(minority.nrows());
                        oversample_local_gmm(&minority, k, needed, cfg.em, rng.child(i as u64))?
                    }
                    _ => {
                        let rows = s.abc_rows.as_ref().ok_or_else(|| {
                            Error::MissingArtifact(format!("posterior samples for site {}", s.site_id))
                        })?;
                        if rows.nrows() != needed {
                            return Err(Error::Shape(format!(
                                "site {} needs {needed} oversampled rows, got {}",
                                s.site_id,
                                rows.nrows()
                            )));
                        }
                        rows.clone()
                    }
                };
                let (x, y) = augmented(split, &extra)?;
                let (model, cut) = fit_and_score(&x, &y, cfg)?;
                score_site(s.site_id, condition, &model, cut, split)
            })
            .collect(),
    }
}

/// Posterior-predictive rows for every site, sized to balance its classes.
pub fn posterior_rows_for(sites: &[SplitFeatures], accepted: &[GmmParams], rng: RngHandle) -> Result<Vec<Matrix>> {
    sites
        .iter()
        .enumerate()
        .map(|(i, s)| posterior_oversample(accepted, oversample_count(&s.train_y), &mut rng.child(i as u64).rng()))
        .collect()
}

/// A text-table row label and how to format that metric.
type Field = (&'static str, fn(&MetricsRow) -> String);

/// All rows of one run plus what is needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
    pub seeds: std::collections::BTreeMap<String, u64>,
    pub config_hash: String,
}

impl MetricsReport {
    /// Rows grouped by site, conditions in Global/Raw/OS/ABC order.
    pub fn ordered(&self) -> Vec<&MetricsRow> {
        let mut rows: Vec<&MetricsRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| (r.site_id, r.condition));
        rows
    }

    pub fn get(&self, site_id: u32, condition: Condition) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.site_id == site_id && r.condition == condition)
    }

    /// Aligned table with metrics as rows and one column per (site, condition).
    pub fn render_text(&self) -> String {
        let rows = self.ordered();
        let mut out = String::new();
        let fields: [Field; 8] = [
            ("Accuracy", |r| format!("{:.4}", r.metrics.accuracy)),
            ("Sensitivity", |r| format!("{:.4}", r.metrics.sensitivity)),
            ("Specificity", |r| format!("{:.4}", r.metrics.specificity)),
            ("Precision", |r| {
                flagged(r.metrics.precision, r.metrics.degenerate.precision)
            }),
            ("Recall", |r| flagged(r.metrics.recall, r.metrics.degenerate.recall)),
            ("F1", |r| flagged(r.metrics.f1, r.metrics.degenerate.f1)),
            ("Threshold", |r| r.threshold.map_or("-".into(), |t| format!("{t:.4}"))),
            ("Cut-off", |r| format!("{:.4}", r.cutoff)),
        ];
        let headers: Vec<String> = rows.iter().map(|r| r.condition.column_label(r.site_id)).collect();
        let width = headers.iter().map(String::len).max().unwrap_or(0).max(8);
        out.push_str(&format!("{:<12}", ""));
        for h in &headers {
            out.push_str(&format!(" {h:>width$}"));
        }
        out.push('\n');
        for (name, cell) in fields {
            out.push_str(&format!("{name:<12}"));
            for r in &rows {
                out.push_str(&format!(" {:>width$}", cell(r)));
            }
            out.push('\n');
        }
        out.push_str(&format!("\nconfig {}\n", self.config_hash));
        for (name, seed) in &self.seeds {
            out.push_str(&format!("seed {name} {seed}\n"));
        }
        out
    }
}

fn flagged(v: f64, degenerate: bool) -> String {
    if degenerate {
        format!("{v:.4}!")
    } else {
        format!("{v:.4}")
    }
}
