//! Dense binary classifier: explicit forward pass, backpropagation, Adam
//! updates, and a deterministic minibatch training loop.
//!
//! The reference architecture is 600 -> 500 -> 250 -> 50 -> 20 -> 4 -> 2 with
//! ReLU hidden layers and a 2-way softmax head trained with negative log
//! likelihood of the true class.

use crate::error::{GaitError, Result};
use crate::metrics::{confusion_matrix, EvalReport};
use crate::signal::{DatasetSplit, FeatureWindow, Gender, NormStats, CHANNEL_NAMES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Layer dimensions of the reference architecture, input first.
pub const PAPER_DIMS: [usize; 7] = [600, 500, 250, 50, 20, 4, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Softmax,
    Identity,
}

/// One dense layer: row-major (out_dim x in_dim) weights plus biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl LayerParams {
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.in_dim + inp]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNetwork {
    pub layers: Vec<LayerParams>,
    pub norm_stats: NormStats,
    pub channel_order: Vec<String>,
    pub seed: u64,
}

/// Per-layer pre-activations and activations from one forward pass.
/// `activations[0]` is the input; `activations[L]` the softmax output.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub pre_activations: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn input(&self) -> &[f64] {
        &self.activations[0]
    }

    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has layers")
    }

    pub fn logits(&self) -> &[f64] {
        self.pre_activations.last().expect("trace has layers")
    }
}

/// dLoss/dW and dLoss/db for every layer, same shapes as the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Gradients {
            d_weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            d_biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (acc, g) in self.d_weights.iter_mut().zip(&other.d_weights) {
            for (a, x) in acc.iter_mut().zip(g) {
                *a += scale * x;
            }
        }
        for (acc, g) in self.d_biases.iter_mut().zip(&other.d_biases) {
            for (a, x) in acc.iter_mut().zip(g) {
                *a += scale * x;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.d_weights.iter_mut().chain(self.d_biases.iter_mut()) {
            for x in g {
                *x *= factor;
            }
        }
    }
}

/// Adam accumulators and hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m_weights: Vec<Vec<f64>>,
    pub v_weights: Vec<Vec<f64>>,
    pub m_biases: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &DenseNetwork, lr: f64) -> Self {
        AdamState {
            m_weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            v_weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            m_biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            v_biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            max_epochs: 200,
            patience: 10,
            lr: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_macro_f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
}

impl DenseNetwork {
    /// Builds a network with the given layer dimensions (input first).
    /// He-uniform weights (+-sqrt(6/in_dim)), zero biases, ReLU hidden layers,
    /// softmax head; deterministic for a fixed seed.
    pub fn with_dims(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(GaitError::invalid("network needs at least one layer"));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n_layers = dims.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (in_dim, out_dim) = (dims[l], dims[l + 1]);
            let bound = (6.0 / in_dim as f64).sqrt();
            let weights = (0..in_dim * out_dim)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            layers.push(LayerParams {
                in_dim,
                out_dim,
                weights,
                biases: vec![0.0; out_dim],
                activation: if l + 1 == n_layers {
                    Activation::Softmax
                } else {
                    Activation::ReLU
                },
            });
        }
        Ok(DenseNetwork {
            layers,
            norm_stats: NormStats::identity(dims[0]),
            channel_order: CHANNEL_NAMES.iter().map(|s| s.to_string()).collect(),
            seed,
        })
    }

    /// The reference gait architecture.
    pub fn paper_architecture(seed: u64) -> Self {
        Self::with_dims(&PAPER_DIMS, seed).expect("fixed dims are valid")
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }
}

pub fn init_network(seed: u64) -> DenseNetwork {
    DenseNetwork::paper_architecture(seed)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Full forward pass, keeping per-layer pre-activations and activations.
pub fn forward(net: &DenseNetwork, input: &[f64]) -> Result<ForwardTrace> {
    if input.len() != net.input_dim() {
        return Err(GaitError::invalid(format!(
            "forward: input dimension {} != network input {}",
            input.len(),
            net.input_dim()
        )));
    }
    let mut pre_activations = Vec::with_capacity(net.layers.len());
    let mut activations = Vec::with_capacity(net.layers.len() + 1);
    activations.push(input.to_vec());
    for layer in &net.layers {
        let prev = activations.last().expect("non-empty");
        let mut z = layer.biases.clone();
        for (k, zk) in z.iter_mut().enumerate() {
            let row = &layer.weights[k * layer.in_dim..(k + 1) * layer.in_dim];
            *zk += row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>();
        }
        let a = match layer.activation {
            Activation::ReLU => z.iter().map(|&v| v.max(0.0)).collect(),
            Activation::Softmax => softmax(&z),
            Activation::Identity => z.clone(),
        };
        pre_activations.push(z);
        activations.push(a);
    }
    Ok(ForwardTrace {
        pre_activations,
        activations,
    })
}

/// Negative log likelihood of the true class, clamped away from zero.
pub fn cross_entropy(probs: &[f64], label: Gender) -> Result<f64> {
    if probs.len() != 2 {
        return Err(GaitError::invalid("cross_entropy: expected 2 probabilities"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(GaitError::invalid(format!(
            "cross_entropy: invalid probability vector {probs:?}"
        )));
    }
    let p = probs[label.class_index()].clamp(1e-12, 1.0);
    Ok(-p.ln())
}

/// Backpropagation for softmax + cross-entropy. The output delta is
/// `probs - onehot(label)`; ReLU gates take derivative 0 at exactly 0.
pub fn backward(net: &DenseNetwork, trace: &ForwardTrace, label: Gender) -> Result<Gradients> {
    if trace.activations.len() != net.layers.len() + 1 {
        return Err(GaitError::invalid("backward: trace does not match network"));
    }
    let n_layers = net.layers.len();
    let mut d_weights = vec![Vec::new(); n_layers];
    let mut d_biases = vec![Vec::new(); n_layers];

    let mut delta: Vec<f64> = trace.output().to_vec();
    delta[label.class_index()] -= 1.0;

    for l in (0..n_layers).rev() {
        let layer = &net.layers[l];
        let prev = &trace.activations[l];
        let mut dw = vec![0.0; layer.weights.len()];
        for (k, &d) in delta.iter().enumerate() {
            let row = &mut dw[k * layer.in_dim..(k + 1) * layer.in_dim];
            for (w, a) in row.iter_mut().zip(prev) {
                *w = d * a;
            }
        }
        d_weights[l] = dw;
        d_biases[l] = delta.clone();

        if l > 0 {
            let mut next = vec![0.0; layer.in_dim];
            for (k, &d) in delta.iter().enumerate() {
                let row = &layer.weights[k * layer.in_dim..(k + 1) * layer.in_dim];
                for (n, w) in next.iter_mut().zip(row) {
                    *n += w * d;
                }
            }
            // Gate by the previous layer's ReLU mask.
            let z_prev = &trace.pre_activations[l - 1];
            match net.layers[l - 1].activation {
                Activation::ReLU => {
                    for (n, &z) in next.iter_mut().zip(z_prev) {
                        if z <= 0.0 {
                            *n = 0.0;
                        }
                    }
                }
                Activation::Identity => {}
                Activation::Softmax => {
                    return Err(GaitError::invalid("backward: softmax on a hidden layer"));
                }
            }
            delta = next;
        }
    }
    Ok(Gradients { d_weights, d_biases })
}

/// One Adam update with bias correction. `state.t` is incremented first.
pub fn adam_step(net: &mut DenseNetwork, grads: &Gradients, state: &mut AdamState) {
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let hp = (state.lr, state.beta1, state.beta2, state.epsilon);
    for (l, layer) in net.layers.iter_mut().enumerate() {
        update_params(
            &mut layer.weights,
            &grads.d_weights[l],
            &mut state.m_weights[l],
            &mut state.v_weights[l],
            hp, bc1, bc2,
        );
        update_params(
            &mut layer.biases,
            &grads.d_biases[l],
            &mut state.m_biases[l],
            &mut state.v_biases[l],
            hp, bc1, bc2,
        );
    }
}

fn update_params(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    (lr, beta1, beta2, eps): (f64, f64, f64, f64),
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Mean loss over a set of windows (already normalized).
pub fn mean_loss(net: &DenseNetwork, windows: &[FeatureWindow]) -> Result<f64> {
    let mut total = 0.0;
    for w in windows {
        let trace = forward(net, &w.features)?;
        total += cross_entropy(trace.output(), w.gender)?;
    }
    Ok(total / windows.len() as f64)
}

/// Evaluates predictions over normalized windows into a confusion-matrix report.
pub fn evaluate(net: &DenseNetwork, windows: &[FeatureWindow]) -> Result<EvalReport> {
    let pairs: Vec<(Gender, Gender)> = windows
        .iter()
        .map(|w| predict(net, w, true).map(|(g, _)| (w.gender, g)))
        .collect::<Result<_>>()?;
    let matrix = confusion_matrix(&pairs)?;
    Ok(EvalReport::from_matrix(matrix))
}

/// Deterministic minibatch training with early stopping on validation loss.
///
/// Each epoch shuffles the training windows with the seeded RNG, averages the
/// gradient over each minibatch (the last batch may be smaller and is kept),
/// and applies one Adam step per batch. The returned parameters come from the
/// epoch with the best validation loss.
pub fn train(
    mut net: DenseNetwork,
    split: &DatasetSplit,
    cfg: &TrainConfig,
) -> Result<(DenseNetwork, TrainingHistory)> {
    if split.train.is_empty() {
        return Err(GaitError::invalid("train: empty training set"));
    }
    if cfg.batch_size == 0 || cfg.max_epochs == 0 {
        return Err(GaitError::invalid("train: batch_size and max_epochs must be >= 1"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));
    let mut state = AdamState::new(&net, cfg.lr);
    let mut order: Vec<usize> = (0..split.train.len()).collect();

    let mut history = TrainingHistory {
        epochs: Vec::new(),
        best_epoch: 0,
    };
    let mut best_val_loss = f64::INFINITY;
    let mut best_layers = net.layers.clone();
    let mut stale_epochs = 0usize;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut acc = Gradients::zeros_like(&net);
            for &idx in batch {
                let w = &split.train[idx];
                let trace = forward(&net, &w.features)?;
                epoch_loss += cross_entropy(trace.output(), w.gender)?;
                let grads = backward(&net, &trace, w.gender)?;
                acc.add_scaled(&grads, 1.0);
            }
            acc.scale(1.0 / batch.len() as f64);
            adam_step(&mut net, &acc, &mut state);
        }
        let train_loss = epoch_loss / split.train.len() as f64;

        let (val_loss, val_macro_f1) = if split.validation.is_empty() {
            (train_loss, f64::NAN)
        } else {
            (
                mean_loss(&net, &split.validation)?,
                evaluate(&net, &split.validation)?.macro_f1,
            )
        };
        history.epochs.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            val_macro_f1,
        });

        if val_loss < best_val_loss {
            best_val_loss = val_loss;
            best_layers = net.layers.clone();
            history.best_epoch = epoch;
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs > cfg.patience {
                break;
            }
        }
    }
    net.layers = best_layers;
    Ok((net, history))
}

/// Predicts the class of one window; ties break toward Female (index 0).
/// Applies the network's stored normalization unless `pre_normalized`.
pub fn predict(
    net: &DenseNetwork,
    window: &FeatureWindow,
    pre_normalized: bool,
) -> Result<(Gender, Vec<f64>)> {
    let trace = if pre_normalized {
        forward(net, &window.features)?
    } else {
        let normalized = crate::signal::apply_normalizer(&net.norm_stats, window)?;
        forward(net, &normalized.features)?
    };
    let probs = trace.output().to_vec();
    let gender = if probs[1] > probs[0] {
        Gender::Male
    } else {
        Gender::Female
    };
    Ok((gender, probs))
}
