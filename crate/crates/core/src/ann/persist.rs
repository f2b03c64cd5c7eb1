use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{forward, DenseLayer, MlpModel, Prediction};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, StandardizerStats};

pub const MODEL_FORMAT: &str = "pulsescore-hkann";
pub const MODEL_VERSION: u64 = 1;

/// A trained network together with the standardizer fitted on its training
/// rows. Scores raw (unstandardized) feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PostClassifier {
    pub model: MlpModel,
    pub standardizer: StandardizerStats,
}

impl PostClassifier {
    pub fn predict(&self, raw: &FeatureVector) -> Result<Prediction> {
        let z = self.standardizer.standardize(raw)?;
        forward(&self.model, &z).map(Prediction::from)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u64,
    layer_sizes: Vec<usize>,
    seed: u64,
    standardizer: StandardizerStats,
    layers: Vec<StoredLayer>,
}

#[derive(Serialize, Deserialize)]
struct StoredLayer {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

pub fn model_to_string(clf: &PostClassifier) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        layer_sizes: clf.model.layer_sizes(),
        seed: clf.model.seed(),
        standardizer: clf.standardizer.clone(),
        layers: clf
            .model
            .layers()
            .iter()
            .map(|l| StoredLayer { weights: l.weights.clone(), biases: l.biases.clone() })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_str(text: &str) -> Result<PostClassifier> {
    let corrupt = |d: String| Error::CorruptModel(d);
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
        return Err(corrupt("missing or unknown format tag".into()));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| corrupt("missing version".into()))?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion { found: version, expected: MODEL_VERSION });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    if file.layer_sizes.len() != file.layers.len() + 1 {
        return Err(corrupt("layer count does not match layer_sizes".into()));
    }
    let layers = file
        .layers
        .into_iter()
        .zip(file.layer_sizes.windows(2))
        .map(|(l, w)| DenseLayer { inputs: w[0], outputs: w[1], weights: l.weights, biases: l.biases })
        .collect();
    let model = MlpModel::from_layers(layers, file.seed).map_err(|e| corrupt(e.to_string()))?;
    let dim = model.input_dim();
    if file.standardizer.mean.len() != dim || file.standardizer.std.len() != dim {
        return Err(corrupt("standardizer does not match input dimension".into()));
    }
    Ok(PostClassifier { model, standardizer: file.standardizer })
}

/// Writes the model as versioned JSON. Floats are written in shortest
/// round-trip form, so a reload reproduces every parameter bit-exactly.
pub fn save_model(clf: &PostClassifier, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_string(clf)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PostClassifier> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::CorruptModel(e.to_string()))?;
    model_from_str(&text)
}
