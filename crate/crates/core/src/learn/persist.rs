//! Versioned JSON model envelope.
//!
//! Every persisted model carries the same wrapper: format version, kind tag,
//! standardization statistics, parameters, hyperparameters, seed, and the
//! feature name order. JSON f64 round-trips are exact (shortest-repr
//! printing), so save -> load -> predict matches in-memory predictions
//! bitwise.

use super::{LearnError, ModelParams, Standardization, TrainedModel};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEnvelope {
    pub format_version: u32,
    pub model_kind: String,
    pub standardization: Option<Standardization>,
    pub parameters: serde_json::Value,
    pub hyperparameters: serde_json::Value,
    pub seed: u64,
    pub feature_names: Vec<String>,
}

impl TrainedModel {
    pub fn to_envelope(&self) -> Result<ModelEnvelope, LearnError> {
        let (parameters, hyperparameters) = match &self.params {
            ModelParams::Svm(m) => (
                serde_json::to_value(m)?,
                serde_json::json!({ "lambda": m.lambda, "epochs": m.epochs }),
            ),
            ModelParams::Forest(m) => (
                serde_json::to_value(m)?,
                serde_json::json!({
                    "n_trees": m.trees.len(),
                    "min_leaf": m.min_leaf,
                    "max_features": m.max_features,
                }),
            ),
            ModelParams::Mlp(m) => (
                serde_json::to_value(m)?,
                serde_json::json!({
                    "layer_sizes": m.layer_sizes,
                    "dropout": m.dropout_rate,
                }),
            ),
        };
        Ok(ModelEnvelope {
            format_version: FORMAT_VERSION,
            model_kind: self.kind().to_string(),
            standardization: self.standardization.clone(),
            parameters,
            hyperparameters,
            seed: self.seed,
            feature_names: self.feature_names.clone(),
        })
    }

    pub fn from_envelope(env: ModelEnvelope) -> Result<Self, LearnError> {
        if env.format_version != FORMAT_VERSION {
            return Err(LearnError::BadModel(format!(
                "format version {} (supported: {FORMAT_VERSION})",
                env.format_version
            )));
        }
        let params = match env.model_kind.as_str() {
            "linear_svm" => ModelParams::Svm(serde_json::from_value(env.parameters)?),
            "random_forest" => ModelParams::Forest(serde_json::from_value(env.parameters)?),
            "mlp" => ModelParams::Mlp(serde_json::from_value(env.parameters)?),
            other => return Err(LearnError::BadModel(format!("unknown model kind `{other}`"))),
        };
        Ok(TrainedModel {
            params,
            standardization: env.standardization,
            feature_names: env.feature_names,
            seed: env.seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        let env = self.to_envelope()?;
        fs::write(path, serde_json::to_string(&env)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let env: ModelEnvelope = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_envelope(env)
    }
}
