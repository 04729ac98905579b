//! Two-layer dense network: leaky-ReLU hidden layer with dropout, softmax
//! output, cross-entropy loss, trained with Adam.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qol::features::FeatureMatrix;
use crate::rng;
use crate::survey::QolClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub classes: usize,
    /// Slope of the hidden activation for negative inputs.
    pub leaky_slope: f64,
    /// Drop probability on the hidden layer, training only.
    pub dropout: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial value of every bias term.
    pub bias_init: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_units: 32,
            classes: QolClass::COUNT,
            leaky_slope: 0.01,
            dropout: 0.5,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 500,
            batch_size: 32,
            bias_init: 1.0,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.hidden_units == 0 {
            return bad("hidden_units must be >= 1");
        }
        if self.classes < 2 {
            return bad("classes must be >= 2");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// All weights and biases in one flat buffer:
/// `[w1 (hidden x input, row-major) | b1 | w2 (classes x hidden) | b2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub leaky_slope: f64,
    pub data: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(input_dim: usize, hidden: usize, classes: usize, leaky_slope: f64) -> Self {
        let len = hidden * input_dim + hidden + classes * hidden + classes;
        MlpParams {
            input_dim,
            hidden,
            classes,
            leaky_slope,
            data: vec![0.0; len],
        }
    }

    /// Glorot-uniform weights, constant biases.
    pub fn init<R: Rng>(input_dim: usize, config: &MlpConfig, rng: &mut R) -> Self {
        let mut p = MlpParams::zeros(input_dim, config.hidden_units, config.classes, config.leaky_slope);
        let l1 = (6.0 / (input_dim + p.hidden) as f64).sqrt();
        let l2 = (6.0 / (p.hidden + p.classes) as f64).sqrt();
        for w in p.w1_mut() {
            *w = rng.random_range(-l1..l1);
        }
        p.b1_mut().fill(config.bias_init);
        for w in p.w2_mut() {
            *w = rng.random_range(-l2..l2);
        }
        p.b2_mut().fill(config.bias_init);
        p
    }

    fn offsets(&self) -> [usize; 4] {
        let w1 = self.hidden * self.input_dim;
        let b1 = w1 + self.hidden;
        let w2 = b1 + self.classes * self.hidden;
        [w1, b1, w2, w2 + self.classes]
    }

    pub fn w1(&self) -> &[f64] {
        let [a, ..] = self.offsets();
        &self.data[..a]
    }
    pub fn b1(&self) -> &[f64] {
        let [a, b, ..] = self.offsets();
        &self.data[a..b]
    }
    pub fn w2(&self) -> &[f64] {
        let [_, b, c, _] = self.offsets();
        &self.data[b..c]
    }
    pub fn b2(&self) -> &[f64] {
        let [_, _, c, d] = self.offsets();
        &self.data[c..d]
    }
    pub fn w1_mut(&mut self) -> &mut [f64] {
        let [a, ..] = self.offsets();
        &mut self.data[..a]
    }
    pub fn b1_mut(&mut self) -> &mut [f64] {
        let [a, b, ..] = self.offsets();
        &mut self.data[a..b]
    }
    pub fn w2_mut(&mut self) -> &mut [f64] {
        let [_, b, c, _] = self.offsets();
        &mut self.data[b..c]
    }
    pub fn b2_mut(&mut self) -> &mut [f64] {
        let [_, _, c, d] = self.offsets();
        &mut self.data[c..d]
    }

    fn forward(&self, x: &[f64], mask: Option<&[f64]>, buf: &mut Activations) {
        let (j, h, c) = (self.input_dim, self.hidden, self.classes);
        let (w1, b1, w2, b2) = (self.w1(), self.b1(), self.w2(), self.b2());
        for u in 0..h {
            let row = &w1[u * j..(u + 1) * j];
            let z = b1[u] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            buf.z1[u] = z;
            let a = if z > 0.0 { z } else { self.leaky_slope * z };
            buf.a[u] = match mask {
                Some(m) => a * m[u],
                None => a,
            };
        }
        for k in 0..c {
            let row = &w2[k * h..(k + 1) * h];
            buf.logits[k] = b2[k] + row.iter().zip(&buf.a).map(|(w, v)| w * v).sum::<f64>();
        }
        softmax_into(&buf.logits, &mut buf.probs);
    }

    /// Class probabilities for one row, dropout disabled.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut buf = Activations::new(self.hidden, self.classes);
        self.forward(x, None, &mut buf);
        Ok(buf.probs)
    }
}

struct Activations {
    z1: Vec<f64>,
    a: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
}

impl Activations {
    fn new(hidden: usize, classes: usize) -> Self {
        Activations {
            z1: vec![0.0; hidden],
            a: vec![0.0; hidden],
            logits: vec![0.0; classes],
            probs: vec![0.0; classes],
        }
    }
}

fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn log_softmax_at(logits: &[f64], k: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits[k] - lse
}

/// Mean cross-entropy over `batch` and its gradient. `masks[i]` (one value
/// per hidden unit, already scaled) is applied to the hidden activations of
/// sample `i` when given.
pub fn loss_and_gradient(
    params: &MlpParams,
    rows: &[&[f64]],
    labels: &[usize],
    masks: Option<&[Vec<f64>]>,
) -> (f64, Vec<f64>) {
    let (j, h, c) = (params.input_dim, params.hidden, params.classes);
    let mut grad = vec![0.0; params.data.len()];
    let [b1_at, w2_at, b2_at, _] = params.offsets();
    let w2 = params.w2();
    let mut buf = Activations::new(h, c);
    let mut dz2 = vec![0.0; c];
    let mut dz1 = vec![0.0; h];
    let n = rows.len() as f64;
    let mut loss = 0.0;

    for (i, (x, &y)) in rows.iter().zip(labels).enumerate() {
        let mask = masks.map(|m| m[i].as_slice());
        params.forward(x, mask, &mut buf);
        loss -= log_softmax_at(&buf.logits, y);

        for k in 0..c {
            dz2[k] = (buf.probs[k] - if k == y { 1.0 } else { 0.0 }) / n;
        }
        for k in 0..c {
            let g = &mut grad[w2_at + k * h..w2_at + (k + 1) * h];
            for u in 0..h {
                g[u] += dz2[k] * buf.a[u];
            }
            grad[b2_at + k] += dz2[k];
        }
        for u in 0..h {
            let mut da = 0.0;
            for k in 0..c {
                da += w2[k * h + u] * dz2[k];
            }
            let slope = if buf.z1[u] > 0.0 { 1.0 } else { params.leaky_slope };
            let m = mask.map_or(1.0, |m| m[u]);
            dz1[u] = da * m * slope;
        }
        for u in 0..h {
            let g = &mut grad[u * j..(u + 1) * j];
            for (gv, xv) in g.iter_mut().zip(x.iter()) {
                *gv += dz1[u] * xv;
            }
            grad[b1_at + u] += dz1[u];
        }
    }
    (loss / n, grad)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &MlpConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grad[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub params: MlpParams,
    pub config: MlpConfig,
    pub seed: u64,
    /// Mean training loss of the last epoch (dropout active).
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
}

impl TrainedModel {
    pub fn input_dim(&self) -> usize {
        self.params.input_dim
    }
}

/// Fit the network to `x`. Features are expected to be scaled already.
pub fn train(x: &FeatureMatrix, config: &MlpConfig) -> Result<TrainedModel> {
    config.validate()?;
    if x.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let present = x.classes_present();
    if present < 2 {
        return Err(Error::TooFewClasses(present));
    }
    let labels = x.label_indices();
    if let Some(&l) = labels.iter().find(|&&l| l >= config.classes) {
        return Err(Error::InvalidArgument(format!(
            "label index {l} exceeds configured classes {}",
            config.classes
        )));
    }

    let mut params = MlpParams::init(x.dim(), config, &mut rng::substream(config.seed, rng::INIT));
    let mut batch_rng = rng::substream(config.seed, rng::BATCHING);
    let mut drop_rng = rng::substream(config.seed, rng::DROPOUT);
    let keep = 1.0 - config.dropout;
    let mut adam = Adam::new(params.data.len());
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut batch_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let rows: Vec<&[f64]> = chunk.iter().map(|&i| x.rows[i].as_slice()).collect();
            let ys: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let masks: Option<Vec<Vec<f64>>> = (config.dropout > 0.0).then(|| {
                chunk
                    .iter()
                    .map(|_| {
                        (0..config.hidden_units)
                            .map(|_| if drop_rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                            .collect()
                    })
                    .collect()
            });
            let (loss, grad) = loss_and_gradient(&params, &rows, &ys, masks.as_deref());
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, loss });
            }
            epoch_loss += loss * chunk.len() as f64;
            adam.step(&mut params.data, &grad, config);
        }
        history.push(epoch_loss / x.len() as f64);
    }

    Ok(TrainedModel {
        params,
        config: config.clone(),
        seed: config.seed,
        final_loss: history.last().copied().unwrap_or(f64::NAN),
        loss_history: history,
    })
}

pub fn predict_proba(model: &TrainedModel, x: &[f64]) -> Result<Vec<f64>> {
    model.params.predict_proba(x)
}

/// Index of the most probable class; ties resolve to the lower index.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    best
}
