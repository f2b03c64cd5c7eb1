//! Feed-forward post-classifier trained on human quality scores.
//!
//! Each hidden layer computes `sigmoid(W·x + b)` from the previous layer's
//! output; the output layer applies a softmax over the five score classes
//! 0..=4. Training is plain full-batch steepest descent on the mean squared
//! error between the softmax output and the one-hot score.

mod clusters;
mod persist;
mod train;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, N_FEATURES};

pub use clusters::gaussian_clusters;
pub use persist::{load_model, model_from_str, model_to_string, save_model, PostClassifier, MODEL_FORMAT, MODEL_VERSION};
pub use train::{gradient, mse_loss, train, Gradient, Hyperparams, TrainingOutcome, TrainingVector};

pub const N_SCORES: usize = 5;
pub const DEFAULT_LAYER_SIZES: [usize; 5] = [N_FEATURES, 32, 16, 8, N_SCORES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    #[inline]
    pub fn weight(&self, out: usize, input: usize) -> f64 {
        self.weights[out * self.inputs + input]
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.biases[o]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
    seed: u64,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Max-subtracted softmax.
pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Randomly initialised network with the fixed three-hidden-layer shape
/// `[18, h1, h2, h3, 5]`. Weights are uniform in `±sqrt(6 / (fan_in +
/// fan_out))`, biases zero.
pub fn init_model(layer_sizes: &[usize], seed: u64) -> Result<MlpModel> {
    let ok = layer_sizes.len() == 5
        && layer_sizes[0] == N_FEATURES
        && layer_sizes[4] == N_SCORES
        && layer_sizes.iter().all(|&s| s > 0);
    if !ok {
        return Err(Error::MalformedLayers(layer_sizes.to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = layer_sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut layer = DenseLayer::zeros(fan_in, fan_out);
            for v in &mut layer.weights {
                *v = rng.random_range(-r..=r);
            }
            layer
        })
        .collect();
    Ok(MlpModel { layers, seed })
}

impl MlpModel {
    /// Builds a network of any depth from explicit layers. Used for toy
    /// networks in tests and when loading from disk.
    pub fn from_layers(layers: Vec<DenseLayer>, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::MalformedLayers(vec![]));
        }
        let sizes: Vec<usize> =
            std::iter::once(layers[0].inputs).chain(layers.iter().map(|l| l.outputs)).collect();
        for (i, l) in layers.iter().enumerate() {
            let chained = i == 0 || layers[i - 1].outputs == l.inputs;
            let shaped = l.weights.len() == l.inputs * l.outputs && l.biases.len() == l.outputs;
            if !chained || !shaped {
                return Err(Error::MalformedLayers(sizes));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite model parameter".into()));
            }
        }
        Ok(Self { layers, seed })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs).chain(self.layers.iter().map(|l| l.outputs)).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.outputs).unwrap_or(0)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Outputs of every layer, input first and softmax output last.
    pub(crate) fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(acts.last().expect("input pushed"));
            acts.push(if i == last { softmax(&z) } else { z.into_iter().map(sigmoid).collect() });
        }
        acts
    }

    /// Network output for an arbitrary input vector.
    pub fn output(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), actual: x.len() });
        }
        Ok(self.activations(x).pop().expect("at least one layer"))
    }
}

/// Softmax output over scores 0..=4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub probs: [f64; N_SCORES],
}

impl ScoreDistribution {
    /// Most probable score, ties going to the lower score.
    pub fn argmax(&self) -> u8 {
        let mut best = 0;
        for k in 1..N_SCORES {
            if self.probs[k] > self.probs[best] {
                best = k;
            }
        }
        best as u8
    }

    /// `Σ k·p_k`, the continuous ranking statistic.
    pub fn expected_score(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Network output for a standardized feature vector.
pub fn forward(model: &MlpModel, fv: &FeatureVector) -> Result<ScoreDistribution> {
    let out = model.output(&fv.values)?;
    let probs: [f64; N_SCORES] = out
        .as_slice()
        .try_into()
        .map_err(|_| Error::DimensionMismatch { expected: N_SCORES, actual: out.len() })?;
    Ok(ScoreDistribution { probs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: u8,
    pub expected_score: f64,
    pub dist: ScoreDistribution,
}

impl From<ScoreDistribution> for Prediction {
    fn from(dist: ScoreDistribution) -> Self {
        Self { score: dist.argmax(), expected_score: dist.expected_score(), dist }
    }
}

pub fn predict_score(model: &MlpModel, fv: &FeatureVector) -> Result<Prediction> {
    forward(model, fv).map(Prediction::from)
}
