//! Versioned JSON serialization of a trained network and its preprocessing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qol::features::{FeatureSet, MinMaxScaler};
use crate::qol::mlp::{MlpConfig, MlpParams, TrainedModel};

pub const MODEL_FORMAT: &str = "civic-mlp";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `[outputs, inputs]`; `weights` is row-major in this shape.
    pub shape: [usize; 2],
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub feature_set: FeatureSet,
    pub columns: Vec<String>,
    pub scaler: MinMaxScaler,
    pub hidden: Layer,
    pub output: Layer,
    pub leaky_slope: f64,
    pub config: MlpConfig,
    pub seed: u64,
    pub final_loss: f64,
}

impl ModelFile {
    pub fn new(
        model: &TrainedModel,
        feature_set: FeatureSet,
        columns: Vec<String>,
        scaler: MinMaxScaler,
    ) -> Self {
        let p = &model.params;
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            feature_set,
            columns,
            scaler,
            hidden: Layer {
                shape: [p.hidden, p.input_dim],
                weights: p.w1().to_vec(),
                bias: p.b1().to_vec(),
            },
            output: Layer {
                shape: [p.classes, p.hidden],
                weights: p.w2().to_vec(),
                bias: p.b2().to_vec(),
            },
            leaky_slope: p.leaky_slope,
            config: model.config.clone(),
            seed: model.seed,
            final_loss: model.final_loss,
        }
    }

    /// Accepts a bare model object or a CLI artifact wrapping one in `data`.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("artifact").and_then(|a| a.as_str()) == Some("model") {
            value = value["data"].take();
        }
        let version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != MODEL_VERSION {
            return Err(Error::ModelVersion(version));
        }
        let file: ModelFile = serde_json::from_value(value)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::InvalidArgument(format!("not a model file: format {:?}", file.format)));
        }
        file.params()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ModelFile::from_json(&text)
    }

    pub fn params(&self) -> Result<MlpParams> {
        let [h, j] = self.hidden.shape;
        let [c, h2] = self.output.shape;
        let shapes_ok = h2 == h
            && self.hidden.weights.len() == h * j
            && self.hidden.bias.len() == h
            && self.output.weights.len() == c * h
            && self.output.bias.len() == c
            && self.columns.len() == j;
        if !shapes_ok {
            return Err(Error::InvalidArgument("model file layer shapes are inconsistent".into()));
        }
        let mut p = MlpParams::zeros(j, h, c, self.leaky_slope);
        p.w1_mut().copy_from_slice(&self.hidden.weights);
        p.b1_mut().copy_from_slice(&self.hidden.bias);
        p.w2_mut().copy_from_slice(&self.output.weights);
        p.b2_mut().copy_from_slice(&self.output.bias);
        Ok(p)
    }

    /// Scale a raw feature row and return class probabilities.
    pub fn predict_raw(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let x = self.scaler.transform_row(raw)?;
        self.params()?.predict_proba(&x)
    }
}
