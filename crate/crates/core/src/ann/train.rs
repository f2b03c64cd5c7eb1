use serde::{Deserialize, Serialize};

use super::{DenseLayer, MlpModel, N_SCORES};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// A standardized feature vector paired with its human score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingVector {
    pub fv: FeatureVector,
    pub score: u8,
}

impl TrainingVector {
    pub fn new(fv: FeatureVector, score: u8) -> Result<Self> {
        if score as usize >= N_SCORES {
            return Err(Error::InvalidParameter(format!("score {score} outside 0..=4")));
        }
        Ok(Self { fv, score })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub target_mse: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { learning_rate: 0.5, max_epochs: 2000, target_mse: 0.01, seed: 1 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        // ρ = 0 is accepted so a frozen run can be expressed
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParameter("learning_rate must be a non-negative number".into()));
        }
        if !(self.target_mse > 0.0) {
            return Err(Error::InvalidParameter("target_mse must be positive".into()));
        }
        Ok(())
    }
}

/// Same shape as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<DenseLayer>,
}

impl Gradient {
    fn zeros_like(model: &MlpModel) -> Self {
        Self { layers: model.layers().iter().map(|l| DenseLayer::zeros(l.inputs, l.outputs)).collect() }
    }

    /// Every entry, weights before biases, layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
    }

    fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|v| *v *= s);
        }
    }
}

fn check_batch(model: &MlpModel, inputs: &[&[f64]], targets: &[usize]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::EmptySet);
    }
    for (x, &t) in inputs.iter().zip(targets) {
        if x.len() != model.input_dim() {
            return Err(Error::DimensionMismatch { expected: model.input_dim(), actual: x.len() });
        }
        if t >= model.output_dim() {
            return Err(Error::InvalidParameter(format!("target class {t} out of range")));
        }
    }
    Ok(())
}

fn sample_loss(out: &[f64], target: usize) -> f64 {
    out.iter()
        .enumerate()
        .map(|(k, p)| {
            let d = p - if k == target { 1.0 } else { 0.0 };
            d * d
        })
        .sum::<f64>()
        / out.len() as f64
}

/// Mean over samples and outputs of `(p_k - onehot_k)^2`, plus its exact
/// gradient by reverse-mode differentiation.
pub(crate) fn loss_and_gradient(model: &MlpModel, inputs: &[&[f64]], targets: &[usize]) -> Result<(f64, Gradient)> {
    check_batch(model, inputs, targets)?;
    let mut grad = Gradient::zeros_like(model);
    let mut loss = 0.0;
    let layers = model.layers();
    let k_out = model.output_dim() as f64;

    for (x, &target) in inputs.iter().zip(targets) {
        let acts = model.activations(x);
        let p = acts.last().expect("output layer");
        loss += sample_loss(p, target);

        // dL/dp through the softmax Jacobian: dz_j = p_j (g_j - Σ_k p_k g_k)
        let g: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(k, &pk)| 2.0 / k_out * (pk - if k == target { 1.0 } else { 0.0 }))
            .collect();
        let dot: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        let mut delta: Vec<f64> = p.iter().zip(&g).map(|(pj, gj)| pj * (gj - dot)).collect();

        for li in (0..layers.len()).rev() {
            let layer = &layers[li];
            let a_in = &acts[li];
            let gl = &mut grad.layers[li];
            for (o, &d) in delta.iter().enumerate() {
                gl.biases[o] += d;
                let row = &mut gl.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (w, a) in row.iter_mut().zip(a_in) {
                    *w += d * a;
                }
            }
            if li > 0 {
                // back through W then the sigmoid of the previous layer
                delta = (0..layer.inputs)
                    .map(|i| {
                        let back: f64 = (0..layer.outputs).map(|o| layer.weight(o, i) * delta[o]).sum();
                        back * a_in[i] * (1.0 - a_in[i])
                    })
                    .collect();
            }
        }
    }
    let n = inputs.len() as f64;
    grad.scale(1.0 / n);
    Ok((loss / n, grad))
}

fn unpack(batch: &[TrainingVector]) -> (Vec<&[f64]>, Vec<usize>) {
    (batch.iter().map(|t| &t.fv.values[..]).collect(), batch.iter().map(|t| t.score as usize).collect())
}

pub fn mse_loss(model: &MlpModel, batch: &[TrainingVector]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut total = 0.0;
    for t in batch {
        let out = model.output(&t.fv.values)?;
        if t.score as usize >= out.len() {
            return Err(Error::InvalidParameter(format!("score {} out of range", t.score)));
        }
        total += sample_loss(&out, t.score as usize);
    }
    Ok(total / batch.len() as f64)
}

pub fn gradient(model: &MlpModel, batch: &[TrainingVector]) -> Result<Gradient> {
    let (inputs, targets) = unpack(batch);
    loss_and_gradient(model, &inputs, &targets).map(|(_, g)| g)
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub model: MlpModel,
    /// `history[e]` is the loss after `e` weight updates.
    pub history: Vec<f64>,
    pub converged: bool,
}

impl TrainingOutcome {
    pub fn epochs(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    pub fn final_loss(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Full-batch steepest descent `w ← w − ρ·g` until the loss drops below
/// `target_mse` or `max_epochs` updates have been made.
pub fn train(model: &MlpModel, data: &[TrainingVector], hp: &Hyperparams) -> Result<TrainingOutcome> {
    hp.validate()?;
    let (inputs, targets) = unpack(data);
    let mut model = model.clone();
    let mut history = Vec::new();
    let mut converged = false;
    for epoch in 0..=hp.max_epochs {
        let (loss, grad) = loss_and_gradient(&model, &inputs, &targets)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(loss);
        if loss < hp.target_mse {
            converged = true;
            break;
        }
        if epoch == hp.max_epochs {
            break;
        }
        for (layer, g) in model.layers_mut().iter_mut().zip(&grad.layers) {
            for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                *w -= hp.learning_rate * gw;
            }
            for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
                *b -= hp.learning_rate * gb;
            }
        }
        if model.layers().iter().any(|l| l.weights.iter().chain(&l.biases).any(|v| !v.is_finite())) {
            return Err(Error::Diverged { epoch: epoch + 1 });
        }
    }
    Ok(TrainingOutcome { model, history, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::{init_model, DEFAULT_LAYER_SIZES};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(n: usize, seed: u64) -> Vec<TrainingVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let v: [f64; 18] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
                TrainingVector::new(FeatureVector::new(i.to_string(), v), rng.random_range(0..5)).unwrap()
            })
            .collect()
    }

    #[test]
    fn uniform_output_loss() {
        let layers = DEFAULT_LAYER_SIZES.windows(2).map(|w| DenseLayer::zeros(w[0], w[1])).collect();
        let m = MlpModel::from_layers(layers, 0).unwrap();
        let loss = mse_loss(&m, &random_batch(7, 1)).unwrap();
        assert!((loss - 0.16).abs() < 1e-12);
        assert!(matches!(mse_loss(&m, &[]), Err(Error::EmptySet)));
        assert!(matches!(gradient(&m, &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn duplicated_batch_same_loss() {
        let m = init_model(&DEFAULT_LAYER_SIZES, 3).unwrap();
        let b = random_batch(9, 2);
        let mut doubled = b.clone();
        doubled.extend(b.iter().cloned());
        assert!((mse_loss(&m, &b).unwrap() - mse_loss(&m, &doubled).unwrap()).abs() < 1e-15);
        let (l, _) = loss_and_gradient(&m, &unpack(&b).0, &unpack(&b).1).unwrap();
        assert!((l - mse_loss(&m, &b).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn batch_gradient_is_mean_of_sample_gradients() {
        let m = init_model(&[18, 8, 8, 8, 5], 4).unwrap();
        let b = random_batch(6, 5);
        let whole = gradient(&m, &b).unwrap().flatten();
        let mut avg = vec![0.0; whole.len()];
        for t in &b {
            for (a, g) in avg.iter_mut().zip(gradient(&m, std::slice::from_ref(t)).unwrap().flatten()) {
                *a += g / b.len() as f64;
            }
        }
        for (a, w) in avg.iter().zip(&whole) {
            assert!((a - w).abs() < 1e-14);
        }
    }

    #[test]
    fn finite_differences_agree() {
        let m = init_model(&[18, 8, 8, 8, 5], 11).unwrap();
        let b = random_batch(10, 12);
        let analytic = gradient(&m, &b).unwrap().flatten();
        let eps = 1e-5;
        let mut idx = 0;
        for li in 0..m.layers().len() {
            let n_w = m.layers()[li].weights.len();
            let n_b = m.layers()[li].biases.len();
            for j in 0..n_w + n_b {
                let bump = |delta: f64| {
                    let mut mm = m.clone();
                    let l = &mut mm.layers_mut()[li];
                    if j < n_w { l.weights[j] += delta } else { l.biases[j - n_w] += delta }
                    mse_loss(&mm, &b).unwrap()
                };
                let numeric = (bump(eps) - bump(-eps)) / (2.0 * eps);
                let a = analytic[idx];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-300);
                assert!(rel < 1e-4 || (a - numeric).abs() < 1e-11, "param {idx}: {a} vs {numeric}");
                idx += 1;
            }
        }
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let m = init_model(&DEFAULT_LAYER_SIZES, 5).unwrap();
        let hp = Hyperparams { learning_rate: 0.0, max_epochs: 20, ..Default::default() };
        let out = train(&m, &random_batch(10, 6), &hp).unwrap();
        assert_eq!(out.model, m);
        assert_eq!(out.epochs(), 20);
        assert!(out.history.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let m = init_model(&DEFAULT_LAYER_SIZES, 9).unwrap();
        let data = random_batch(20, 10);
        let hp = Hyperparams { max_epochs: 50, ..Default::default() };
        let a = train(&m, &data, &hp).unwrap();
        let b = train(&m, &data, &hp).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model, b.model);
        assert!(a.final_loss() < a.history[0]);
    }

    #[test]
    fn divergence_is_reported() {
        let m = init_model(&DEFAULT_LAYER_SIZES, 9).unwrap();
        let mut data = random_batch(5, 1);
        data[2].fv.values[4] = f64::NAN;
        let hp = Hyperparams { max_epochs: 5, ..Default::default() };
        assert!(matches!(train(&m, &data, &hp), Err(Error::Diverged { epoch: 0 })));
    }

    #[test]
    fn gradient_vanishes_at_exact_targets() {
        let mut m = init_model(&DEFAULT_LAYER_SIZES, 2).unwrap();
        m.layers_mut()[3].biases = vec![0.0, 0.0, 0.0, 1000.0, 0.0];
        let batch = vec![TrainingVector::new(FeatureVector::new("a", [0.5; 18]), 3).unwrap()];
        assert_eq!(mse_loss(&m, &batch).unwrap(), 0.0);
        assert!(gradient(&m, &batch).unwrap().flatten().iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn bad_score_rejected() {
        assert!(TrainingVector::new(FeatureVector::new("x", [0.0; 18]), 5).is_err());
    }

    #[test]
    fn row_order_does_not_change_training() {
        let m = init_model(&DEFAULT_LAYER_SIZES, 4).unwrap();
        let data = random_batch(12, 8);
        let mut shuffled = data.clone();
        shuffled.reverse();
        shuffled.swap(0, 5);
        let hp = Hyperparams { max_epochs: 30, ..Default::default() };
        let a = train(&m, &data, &hp).unwrap();
        let b = train(&m, &shuffled, &hp).unwrap();
        for (x, y) in a.history.iter().zip(&b.history) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }
}
