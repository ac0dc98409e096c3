//! Modified autoencoder: a SeLU encoder/decoder with a tanh-bounded latent
//! layer and a logistic-regression bypath hanging off the latent nodes.
//!
//! Training minimizes
//! `alpha * Σ_i ||x_i - x'_i||² + (beta / N) * Σ_i BCE(y_i, σ(w·z_i + b))`,
//! with the reconstruction term left unnormalized. Gradients are computed by
//! hand and applied with Adam.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, select_rows};
use crate::{Error, Matrix, Result, RngHandle, Vector};

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside logs.
pub const PROB_CLAMP: f64 = 1e-12;

pub const FORMAT_TAG: &str = "moae-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Selu,
    Tanh,
    Identity,
    Sigmoid,
}

pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
    }
}

fn selu_grad(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Selu => selu(x),
            // kept strictly inside (-1, 1) where tanh rounds to ±1
            Activation::Tanh => x.tanh().clamp(-TANH_BOUND, TANH_BOUND),
            Activation::Identity => x,
            Activation::Sigmoid => sigmoid(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: &'static str,
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

impl LayerSpec {
    /// Weights plus biases.
    pub fn parameter_count(&self) -> usize {
        self.outputs * self.inputs + self.outputs
    }
}

/// Layer widths. The default hidden widths are 64 and 32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoaeArchitecture {
    pub input_dim: usize,
    pub latent_dim: usize,
    pub hidden: [usize; 2],
}

/// Largest double below 1.
const TANH_BOUND: f64 = 1.0 - f64::EPSILON / 2.0;

const LAYER_NAMES: [&str; 7] = [
    "encode_1",
    "encode_2",
    "latent",
    "decode_1",
    "decode_2",
    "recon",
    "logistic_regression",
];
const ENC1: usize = 0;
const ENC2: usize = 1;
const LATENT: usize = 2;
const DEC1: usize = 3;
const DEC2: usize = 4;
const RECON: usize = 5;
const CLASSIFIER: usize = 6;

impl MoaeArchitecture {
    pub fn new(input_dim: usize, latent_dim: usize) -> Result<Self> {
        Self::with_hidden(input_dim, latent_dim, [64, 32])
    }

    pub fn with_hidden(input_dim: usize, latent_dim: usize, hidden: [usize; 2]) -> Result<Self> {
        if latent_dim == 0 || latent_dim >= input_dim {
            return Err(Error::InvalidArchitecture(format!(
                "latent dimension {latent_dim} must satisfy 1 <= d < D = {input_dim}"
            )));
        }
        if hidden.contains(&0) {
            return Err(Error::InvalidArchitecture("hidden widths must be positive".into()));
        }
        Ok(Self {
            input_dim,
            latent_dim,
            hidden,
        })
    }

    pub fn layers(&self) -> Vec<LayerSpec> {
        let (dd, d, [h1, h2]) = (self.input_dim, self.latent_dim, self.hidden);
        use Activation::*;
        let dims = [
            (dd, h1, Selu),
            (h1, h2, Selu),
            (h2, d, Tanh),
            (d, h2, Selu),
            (h2, h1, Selu),
            (h1, dd, Identity),
            (d, 1, Sigmoid),
        ];
        dims.iter()
            .zip(LAYER_NAMES)
            .map(|(&(inputs, outputs, activation), name)| LayerSpec {
                name,
                inputs,
                outputs,
                activation,
            })
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().iter().map(LayerSpec::parameter_count).sum()
    }
}

/// Weight matrix (`outputs × inputs`) and bias of one fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Matrix,
    pub bias: Vector,
}

impl Dense {
    fn zeros(spec: &LayerSpec) -> Self {
        Self {
            weights: Matrix::zeros(spec.outputs, spec.inputs),
            bias: Vector::zeros(spec.outputs),
        }
    }

    fn pre_activation(&self, input: &Matrix) -> Matrix {
        let mut z = input * self.weights.transpose();
        for (j, mut col) in z.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.bias[j]);
        }
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Relative weights of the reconstruction and classification terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct AdamState {
    step: u64,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoaeModel {
    arch: MoaeArchitecture,
    layers: Vec<Dense>,
    adam: AdamState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoaeOutput {
    pub recon: Matrix,
    pub latent: Matrix,
    pub prob: Vec<f64>,
}

/// Parameter gradients, laid out like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

struct Trace {
    // inputs[l] is the input to layer l; pre[l] its pre-activation
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    output: MoaeOutput,
}

/// Randomly initialized model: weights `N(0, 1/fan_in)`, zero biases.
pub fn init_moae(arch: MoaeArchitecture, seed: RngHandle) -> MoaeModel {
    let mut rng = seed.rng();
    let layers = arch
        .layers()
        .iter()
        .map(|spec| {
            let scale = (1.0 / spec.inputs as f64).sqrt();
            let weights = Matrix::from_fn(spec.outputs, spec.inputs, |_, _| {
                scale * rng.sample::<f64, _>(StandardNormal)
            });
            Dense {
                weights,
                bias: Vector::zeros(spec.outputs),
            }
        })
        .collect();
    MoaeModel::from_layers(arch, layers)
}

impl MoaeModel {
    /// All-zero weights and biases.
    pub fn zeros(arch: MoaeArchitecture) -> Self {
        let layers = arch.layers().iter().map(Dense::zeros).collect();
        Self::from_layers(arch, layers)
    }

    fn from_layers(arch: MoaeArchitecture, layers: Vec<Dense>) -> Self {
        let zeros: Vec<Dense> = arch.layers().iter().map(Dense::zeros).collect();
        Self {
            arch,
            layers,
            adam: AdamState {
                step: 0,
                m: zeros.clone(),
                v: zeros,
            },
        }
    }

    pub fn architecture(&self) -> &MoaeArchitecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn adam_step(&self) -> u64 {
        self.adam.step
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.ncols() != self.arch.input_dim {
            return Err(Error::Shape(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.arch.input_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moAE input contains NaN or infinity".into()));
        }
        Ok(())
    }

    fn run(&self, x: &Matrix) -> Trace {
        let specs = self.arch.layers();
        let mut inputs = Vec::with_capacity(7);
        let mut pre = Vec::with_capacity(7);
        let mut current = x.clone();
        let mut latent = None;
        for (l, spec) in specs.iter().enumerate().take(CLASSIFIER) {
            let z = self.layers[l].pre_activation(&current);
            let act = spec.activation;
            let a = z.map(|v| act.apply(v));
            inputs.push(current);
            pre.push(z);
            if l == LATENT {
                latent = Some(a.clone());
            }
            current = a;
        }
        let latent = latent.expect("latent layer visited");
        let logits = self.layers[CLASSIFIER].pre_activation(&latent);
        let prob = logits.column(0).iter().map(|&v| sigmoid(v)).collect();
        inputs.push(latent.clone());
        pre.push(logits);
        Trace {
            inputs,
            pre,
            output: MoaeOutput {
                recon: current,
                latent,
                prob,
            },
        }
    }

    pub fn forward(&self, x: &Matrix) -> Result<MoaeOutput> {
        self.check_input(x)?;
        Ok(self.run(x).output)
    }

    /// Latent representation of each row, every entry in `(-1, 1)`.
    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.forward(x).map(|o| o.latent)
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, x: &Matrix, y: &[u8], weights: LossWeights) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        check_labels(x.nrows(), y)?;
        let trace = self.run(x);
        let loss = moae_loss(&trace.output.recon, x, &trace.output.prob, y, weights)?;
        Ok((loss, self.backward(x, y, weights, &trace)))
    }

    fn backward(&self, x: &Matrix, y: &[u8], w: LossWeights, trace: &Trace) -> Gradients {
        let specs = self.arch.layers();
        let n = x.nrows() as f64;
        let mut grads: Vec<Dense> = specs.iter().map(Dense::zeros).collect();

        let layer_grad = |delta: &Matrix, input: &Matrix| -> Dense {
            Dense {
                weights: delta.transpose() * input,
                bias: delta.row_sum().transpose(),
            }
        };

        // classifier bypath
        let dlogit = Matrix::from_fn(x.nrows(), 1, |i, _| {
            w.beta / n * (trace.output.prob[i] - f64::from(y[i]))
        });
        grads[CLASSIFIER] = layer_grad(&dlogit, &trace.inputs[CLASSIFIER]);
        let mut dlatent = &dlogit * &self.layers[CLASSIFIER].weights;

        // decoder, from the reconstruction back to the latent nodes
        let mut delta = (&trace.output.recon - x) * (2.0 * w.alpha);
        for l in [RECON, DEC2, DEC1] {
            if l != RECON {
                delta.zip_apply(&trace.pre[l], |d, z| *d *= selu_grad(z));
            }
            grads[l] = layer_grad(&delta, &trace.inputs[l]);
            delta = &delta * &self.layers[l].weights;
        }
        dlatent += delta;

        // tanh latent layer, then the encoder
        let mut delta = dlatent;
        delta.zip_apply(&trace.output.latent, |d, a| *d *= 1.0 - a * a);
        grads[LATENT] = layer_grad(&delta, &trace.inputs[LATENT]);
        for l in [ENC2, ENC1] {
            delta = &delta * &self.layers[l + 1].weights;
            delta.zip_apply(&trace.pre[l], |d, z| *d *= selu_grad(z));
            grads[l] = layer_grad(&delta, &trace.inputs[l]);
        }
        Gradients { layers: grads }
    }

    /// One Adam update with the given gradients.
    pub fn adam_update(&mut self, grads: &Gradients, cfg: AdamConfig) {
        self.adam.step += 1;
        let t = self.adam.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        };
        for (l, layer) in self.layers.iter_mut().enumerate() {
            let g = &grads.layers[l];
            let (m, v) = (&mut self.adam.m[l], &mut self.adam.v[l]);
            for i in 0..layer.weights.len() {
                update(
                    &mut layer.weights.as_mut_slice()[i],
                    g.weights.as_slice()[i],
                    &mut m.weights.as_mut_slice()[i],
                    &mut v.weights.as_mut_slice()[i],
                );
            }
            for i in 0..layer.bias.len() {
                update(&mut layer.bias[i], g.bias[i], &mut m.bias[i], &mut v.bias[i]);
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MoaeDoc {
            format: FORMAT_TAG.to_string(),
            architecture: self.arch,
            layers: self
                .arch
                .layers()
                .iter()
                .zip(&self.layers)
                .map(|(spec, layer)| LayerDoc {
                    name: spec.name.to_string(),
                    activation: spec.activation,
                    weights: linalg::to_rows(&layer.weights),
                    bias: layer.bias.iter().copied().collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Restores weights; the optimizer state starts fresh.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MoaeDoc = serde_json::from_str(s)?;
        if doc.format != FORMAT_TAG {
            return Err(Error::Config(format!("unknown model format {:?}", doc.format)));
        }
        let arch = MoaeArchitecture::with_hidden(
            doc.architecture.input_dim,
            doc.architecture.latent_dim,
            doc.architecture.hidden,
        )?;
        let specs = arch.layers();
        if doc.layers.len() != specs.len() {
            return Err(Error::Shape("wrong number of layers".into()));
        }
        let mut layers = Vec::with_capacity(specs.len());
        for (spec, layer) in specs.iter().zip(doc.layers) {
            let weights = linalg::from_rows(&layer.weights)?;
            if layer.name != spec.name
                || weights.shape() != (spec.outputs, spec.inputs)
                || layer.bias.len() != spec.outputs
            {
                return Err(Error::Shape(format!(
                    "layer {} does not match the architecture",
                    spec.name
                )));
            }
            layers.push(Dense {
                weights,
                bias: Vector::from_vec(layer.bias),
            });
        }
        Ok(Self::from_layers(arch, layers))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    name: String,
    activation: Activation,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MoaeDoc {
    format: String,
    architecture: MoaeArchitecture,
    layers: Vec<LayerDoc>,
}

fn check_labels(n: usize, y: &[u8]) -> Result<()> {
    if y.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} rows", y.len())));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidHyperparameter("labels must be 0 or 1".into()));
    }
    Ok(())
}

/// Weighted reconstruction plus classification loss.
pub fn moae_loss(recon: &Matrix, x: &Matrix, prob: &[f64], y: &[u8], w: LossWeights) -> Result<f64> {
    if recon.shape() != x.shape() {
        return Err(Error::Shape("reconstruction and input shapes differ".into()));
    }
    if prob.len() != x.nrows() {
        return Err(Error::Shape("one probability per row required".into()));
    }
    check_labels(x.nrows(), y)?;
    let recon_term: f64 = (recon - x).norm_squared();
    let n = x.nrows().max(1) as f64;
    let bce: f64 = prob
        .iter()
        .zip(y)
        .map(|(&p, &label)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            if label == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(w.alpha * recon_term + w.beta / n * bce)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Rows per update; `None` (or a size ≥ N) means full batch.
    pub batch_size: Option<usize>,
    pub adam: AdamConfig,
    pub weights: LossWeights,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: None,
            adam: AdamConfig::default(),
            weights: LossWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_loss: f64,
    /// Full-data loss after each epoch.
    pub loss_trace: Vec<f64>,
}

pub fn train_moae<R: Rng + ?Sized>(
    model: &mut MoaeModel,
    x: &Matrix,
    y: &[u8],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    model.check_input(x)?;
    check_labels(x.nrows(), y)?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    let full_loss = |m: &MoaeModel| -> Result<f64> {
        let out = m.run(x).output;
        moae_loss(&out.recon, x, &out.prob, y, cfg.weights)
    };
    let initial_loss = full_loss(model)?;
    let batch = cfg.batch_size.unwrap_or(n).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if batch < n {
            order.shuffle(rng);
        }
        for chunk in order.chunks(batch) {
            let (loss, grads) = if batch == n {
                model.loss_and_gradients(x, y, cfg.weights)?
            } else {
                let xb = select_rows(x, chunk);
                let yb: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
                model.loss_and_gradients(&xb, &yb, cfg.weights)?
            };
            if !loss.is_finite() {
                return Err(Error::DivergedTraining { epoch });
            }
            model.adam_update(&grads, cfg.adam);
        }
        let loss = full_loss(model)?;
        if !loss.is_finite() {
            return Err(Error::DivergedTraining { epoch });
        }
        loss_trace.push(loss);
    }
    Ok(TrainReport {
        initial_loss,
        loss_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_two_parameter_counts() {
        let arch = MoaeArchitecture::new(88, 24).unwrap();
        let counts: Vec<usize> = arch.layers().iter().map(LayerSpec::parameter_count).collect();
        assert_eq!(counts, vec![5696, 2080, 792, 800, 2112, 5720, 25]);
        assert_eq!(arch.parameter_count(), 17225);
    }

    #[test]
    fn latent_must_be_smaller_than_input() {
        assert!(matches!(
            MoaeArchitecture::new(4, 4),
            Err(Error::InvalidArchitecture(_))
        ));
        assert!(MoaeArchitecture::new(4, 0).is_err());
        assert!(MoaeArchitecture::new(2, 1).is_ok());
    }

    #[test]
    fn selu_constants_and_continuity() {
        assert_eq!(selu(0.0), 0.0);
        assert!((selu(1e-15) - selu(-1e-15)).abs() < 1e-12);
        let x = -3.0;
        assert!((selu(x) - SELU_LAMBDA * SELU_ALPHA * (x.exp() - 1.0)).abs() < 1e-15);
        assert!((SELU_LAMBDA - 1.0507).abs() < 1e-4);
        assert!((SELU_ALPHA - 1.6733).abs() < 1e-4);
    }

    #[test]
    fn zero_network_outputs() {
        let model = MoaeModel::zeros(MoaeArchitecture::new(5, 2).unwrap());
        let x = Matrix::from_fn(3, 5, |i, j| (i * 5 + j) as f64 - 4.0);
        let out = model.forward(&x).unwrap();
        assert!(out.latent.iter().all(|&v| v == 0.0));
        assert!(out.recon.iter().all(|&v| v == 0.0));
        assert!(out.prob.iter().all(|&p| p == 0.5));
        assert_eq!(model.encode(&x).unwrap(), Matrix::zeros(3, 2));
    }

    #[test]
    fn unit_width_model_at_origin() {
        let arch = MoaeArchitecture::with_hidden(2, 1, [1, 1]).unwrap();
        let mut model = MoaeModel::zeros(arch);
        for layer in model.layers_mut() {
            layer.weights.fill(1.0);
        }
        let out = model.forward(&Matrix::zeros(1, 2)).unwrap();
        assert_eq!(out.prob[0], 0.5);
        assert_eq!(out.latent.shape(), (1, 1));
        assert_eq!(out.recon.shape(), (1, 2));
    }

    #[test]
    fn rejects_non_finite_input() {
        let model = init_moae(MoaeArchitecture::new(3, 1).unwrap(), RngHandle::new(0, 0));
        let x = Matrix::from_row_slice(1, 3, &[0.0, f64::NAN, 1.0]);
        assert!(matches!(model.forward(&x), Err(Error::NonFinite(_))));
    }

    #[test]
    fn loss_fixtures() {
        let x = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let zero = Matrix::zeros(2, 1);
        let w = LossWeights { alpha: 1.0, beta: 1.0 };
        let l = moae_loss(&zero, &x, &[0.5, 0.5], &[1, 0], w).unwrap();
        assert!((l - (1.0 + 2f64.ln())).abs() < 1e-12);

        let only_bce = LossWeights { alpha: 0.0, beta: 3.0 };
        let one = Matrix::zeros(1, 1);
        let l = moae_loss(&one, &one, &[0.5], &[1], only_bce).unwrap();
        assert!((l - 3.0 * 2f64.ln()).abs() < 1e-12);

        let no_bce = LossWeights { alpha: 1.0, beta: 0.0 };
        assert_eq!(moae_loss(&x, &x, &[0.3, 0.9], &[1, 0], no_bce).unwrap(), 0.0);
    }

    #[test]
    fn saturated_probabilities_are_clamped() {
        let x = Matrix::zeros(1, 1);
        let w = LossWeights { alpha: 1.0, beta: 1.0 };
        let l = moae_loss(&x, &x, &[0.0], &[1], w).unwrap();
        assert!(l.is_finite());
        assert!((l + PROB_CLAMP.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let arch = MoaeArchitecture::new(4, 2).unwrap();
        let mut model = init_moae(arch, RngHandle::new(3, 1));
        let before = model.clone();
        let x = Matrix::from_fn(6, 4, |i, j| ((i + 2 * j) as f64).sin());
        let y = [0, 1, 0, 1, 0, 0];
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let report = train_moae(&mut model, &x, &y, &cfg, &mut RngHandle::new(0, 0).rng()).unwrap();
        assert!(report.loss_trace.is_empty());
        assert_eq!(model, before);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let arch = MoaeArchitecture::new(4, 2).unwrap();
        let mut model = init_moae(arch, RngHandle::new(3, 1));
        let before = model.layers().to_vec();
        let x = Matrix::from_fn(6, 4, |i, j| ((i * j) as f64).cos());
        let y = [0, 1, 0, 1, 0, 0];
        let cfg = TrainConfig {
            epochs: 5,
            adam: AdamConfig {
                lr: 0.0,
                ..AdamConfig::default()
            },
            ..TrainConfig::default()
        };
        train_moae(&mut model, &x, &y, &cfg, &mut RngHandle::new(0, 0).rng()).unwrap();
        assert_eq!(model.layers(), &before[..]);
        assert_eq!(model.adam_step(), 5);
    }

    #[test]
    fn diverging_training_reports_epoch() {
        let arch = MoaeArchitecture::new(3, 1).unwrap();
        let mut model = init_moae(arch, RngHandle::new(1, 1));
        let x = Matrix::from_element(4, 3, 1e200);
        let y = [0, 1, 0, 1];
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let err = train_moae(&mut model, &x, &y, &cfg, &mut RngHandle::new(0, 0).rng()).unwrap_err();
        assert!(matches!(err, Error::DivergedTraining { epoch: 0 }));
    }

    #[test]
    fn json_round_trip_and_format_tag() {
        let arch = MoaeArchitecture::new(6, 2).unwrap();
        let model = init_moae(arch, RngHandle::new(5, 5));
        let back = MoaeModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back.layers(), model.layers());
        let tampered = model.to_json().unwrap().replace(FORMAT_TAG, "moae-v0");
        assert!(MoaeModel::from_json(&tampered).is_err());
    }
}
