use std::borrow::Cow;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CsvRow;
use crate::data::LabeledDataset;
use crate::error::{invalid, Error, Result};
use crate::mixup::{mix_batch, MixupPolicy};
use crate::seed::{derive_seed, rng_from};

const INIT_TAG: u64 = 1;
const MIX_TAG: u64 = 2;

/// Model family: plain logistic regression or a tanh MLP with a logistic output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Logistic,
    Mlp { hidden_width: usize, depth: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelSpec,
    pub epochs: usize,
    pub learning_rate: f64,
    /// `None` trains on the raw data every epoch.
    pub mixup: Option<MixupPolicy>,
    pub seed: u64,
}

impl TrainConfig {
    /// The reference setup for gap studies: one hidden layer of width 64,
    /// 2000 full-batch steps at learning rate 0.5, mixup off.
    pub fn standard(seed: u64) -> Self {
        Self {
            model: ModelSpec::Mlp { hidden_width: 64, depth: 1 },
            epochs: 2000,
            learning_rate: 0.5,
            mixup: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return invalid("epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if let ModelSpec::Mlp { hidden_width, depth } = self.model {
            if hidden_width == 0 || depth == 0 {
                return invalid("mlp needs hidden_width >= 1 and depth >= 1");
            }
        }
        Ok(())
    }
}

/// Final losses of one training run. `gap = test_loss - train_loss`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    /// Beta shape of the mixup policy; `None` when mixup was off or fixed.
    pub alpha: Option<f64>,
    pub train_loss: f64,
    pub test_loss: f64,
    pub gap: f64,
    pub seed_id: u64,
}

impl CsvRow for GapRow {
    fn header() -> Vec<&'static str> {
        vec!["alpha", "seed_id", "train_loss", "test_loss", "gap"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.seed_id.to_string(),
            self.train_loss.to_string(),
            self.test_loss.to_string(),
            self.gap.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub row: GapRow,
    /// Training loss at the start of every epoch (on that epoch's batch).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    inputs: usize,
    outputs: usize,
    /// Row-major `outputs x inputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn init<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (inputs as f64).sqrt();
        let weights = (0..inputs * outputs).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        Self { inputs, outputs, weights, bias: vec![0.0; outputs] }
    }

    fn zeros_like(&self) -> Self {
        Self { weights: vec![0.0; self.weights.len()], bias: vec![0.0; self.bias.len()], ..*self }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.bias)
                .map(|(w, b)| b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()),
        );
    }
}

/// Layers from input to the single output logit; all but the last use tanh.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Network {
    layers: Vec<Dense>,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Network {
    pub(crate) fn new<R: Rng>(spec: ModelSpec, inputs: usize, rng: &mut R) -> Self {
        let mut layers = Vec::new();
        let mut width = inputs;
        if let ModelSpec::Mlp { hidden_width, depth } = spec {
            for _ in 0..depth {
                layers.push(Dense::init(width, hidden_width, rng));
                width = hidden_width;
            }
        }
        layers.push(Dense::init(width, 1, rng));
        Self { layers }
    }

    fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(Dense::zeros_like).collect() }
    }

    /// Mean soft-label logistic loss `softplus(z) - t z` with
    /// `t = (y + 1) / 2`; accumulates the mean gradient into `grad` if given.
    pub(crate) fn loss(&self, data: &LabeledDataset, mut grad: Option<&mut Network>) -> f64 {
        let n = data.len() as f64;
        let depth = self.layers.len();
        let mut acts: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
        let mut total = 0.0;
        for (x, &y) in data.inputs().iter_rows().zip(data.labels()) {
            acts[0].clear();
            acts[0].extend_from_slice(x);
            for (l, layer) in self.layers.iter().enumerate() {
                let (prev, next) = acts.split_at_mut(l + 1);
                layer.forward(&prev[l], &mut next[0]);
                if l + 1 < depth {
                    next[0].iter_mut().for_each(|v| *v = v.tanh());
                }
            }
            let z = acts[depth][0];
            let t = 0.5 * (y + 1.0);
            total += softplus(z) - t * z;

            if let Some(g) = grad.as_deref_mut() {
                let mut delta = vec![(sigmoid(z) - t) / n];
                for l in (0..depth).rev() {
                    let layer = &self.layers[l];
                    let gl = &mut g.layers[l];
                    let a_prev = &acts[l];
                    for (o, d) in delta.iter().enumerate() {
                        gl.bias[o] += d;
                        let row = &mut gl.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        row.iter_mut().zip(a_prev).for_each(|(w, a)| *w += d * a);
                    }
                    if l > 0 {
                        let mut back = vec![0.0; layer.inputs];
                        for (o, d) in delta.iter().enumerate() {
                            let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                            back.iter_mut().zip(row).for_each(|(b, w)| *b += d * w);
                        }
                        back.iter_mut().zip(a_prev).for_each(|(b, a)| *b *= 1.0 - a * a);
                        delta = back;
                    }
                }
            }
        }
        total / n
    }

    fn step(&mut self, grad: &Network, lr: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grad.layers) {
            layer.weights.iter_mut().zip(&g.weights).for_each(|(w, d)| *w -= lr * d);
            layer.bias.iter_mut().zip(&g.bias).for_each(|(b, d)| *b -= lr * d);
        }
    }

    #[cfg(test)]
    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }
}

/// Full-batch gradient descent on the soft-label logistic loss.
///
/// With mixup on, every epoch trains on a fresh [`mix_batch`] of the training
/// set. `train_loss` is the loss of the final parameters on the final epoch's
/// batch (mixed when mixup is on) and `test_loss` their loss on `test`. A
/// non-finite loss at any point aborts with [`Error::Numerical`].
pub fn train(data: &LabeledDataset, test: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let d = data.inputs().cols();
    if test.inputs().cols() != d {
        return invalid(format!("train has {d} features, test has {}", test.inputs().cols()));
    }
    let mut net = Network::new(cfg.model, d, &mut rng_from(derive_seed(cfg.seed, INIT_TAG)));
    let mut mix_rng = rng_from(derive_seed(cfg.seed, MIX_TAG));
    let mut grad = net.zeros_like();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch: Cow<'_, LabeledDataset> = Cow::Borrowed(data);
    for epoch in 0..cfg.epochs {
        if let Some(policy) = &cfg.mixup {
            batch = Cow::Owned(mix_batch(data, policy, &mut mix_rng)?);
        }
        grad = grad.zeros_like();
        let loss = net.loss(&batch, Some(&mut grad));
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("training loss diverged at epoch {epoch}")));
        }
        history.push(loss);
        net.step(&grad, cfg.learning_rate);
    }
    let train_loss = net.loss(&batch, None);
    let test_loss = net.loss(test, None);
    if !(train_loss.is_finite() && test_loss.is_finite()) {
        return Err(Error::Numerical("final loss is not finite".into()));
    }
    let alpha = match cfg.mixup {
        Some(MixupPolicy::Beta(shape)) => Some(shape.get()),
        _ => None,
    };
    Ok(TrainOutcome {
        row: GapRow { alpha, train_loss, test_loss, gap: test_loss - train_loss, seed_id: cfg.seed },
        history,
    })
}
