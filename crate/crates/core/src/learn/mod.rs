//! Trainable classifiers: linear SVM, random forest, and the MLP.
//!
//! All trainers are deterministic under a seed, emit class probabilities
//! `(p_adult, p_kid)`, and serialize through the versioned JSON envelope in
//! [`persist`]. Standardization statistics always come from training rows
//! and ride along with the model so prediction can consume raw features.

pub mod forest;
pub mod mlp;
pub mod persist;
pub mod svm;

pub use forest::{train_random_forest, ForestConfig, RandomForestModel};
pub use mlp::{train_mlp, MlpConfig, MlpModel};
pub use persist::ModelEnvelope;
pub use svm::{train_svm, LinearSvmModel, SvmConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("model file does not match: {0}")]
    BadModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Per-column mean and population standard deviation, fitted on training
/// rows. Zero-variance columns transform to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl Standardization {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; d];
        for row in rows {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                var[j] += (v - mean[j]).powi(2);
            }
        }
        let stddev = var.into_iter().map(|v| (v / n as f64).sqrt()).collect();
        Self { mean, stddev }
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// Training substrate: feature rows with binary labels (ADULT = 0, KID = 1).
#[derive(Debug, Clone)]
pub struct LabeledMatrix {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub feature_names: Vec<String>,
    /// Present when the rows have already been standardized.
    pub standardization: Option<Standardization>,
}

impl LabeledMatrix {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, feature_names: Vec<String>) -> Self {
        assert_eq!(features.len(), labels.len(), "row/label count mismatch");
        let d = feature_names.len();
        for row in &features {
            assert_eq!(row.len(), d, "row width mismatch");
            assert!(row.iter().all(|v| v.is_finite()), "non-finite feature");
        }
        assert!(labels.iter().all(|&l| l < 2), "labels must be binary");
        Self {
            features,
            labels,
            feature_names,
            standardization: None,
        }
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn both_classes_present(&self) -> bool {
        let c = self.class_counts();
        c[0] > 0 && c[1] > 0
    }

    /// Fit per-column statistics, transform rows in place, and keep the
    /// statistics for transform-at-predict.
    pub fn standardize_fit_transform(mut self) -> Self {
        let stats = Standardization::fit(&self.features);
        for row in &mut self.features {
            *row = stats.transform_row(row);
        }
        self.standardization = Some(stats);
        self
    }
}

/// Model-specific parameters behind a common prediction surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Svm(LinearSvmModel),
    Forest(RandomForestModel),
    Mlp(MlpModel),
}

/// A trained classifier plus everything prediction needs: standardization
/// statistics, the feature name order, and the training seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub standardization: Option<Standardization>,
    pub feature_names: Vec<String>,
    pub seed: u64,
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match &self.params {
            ModelParams::Svm(_) => "linear_svm",
            ModelParams::Forest(_) => "random_forest",
            ModelParams::Mlp(_) => "mlp",
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.params {
            ModelParams::Svm(m) => m.weights.len(),
            ModelParams::Forest(m) => m.n_features,
            ModelParams::Mlp(m) => m.layer_sizes[0],
        }
    }

    /// `(p_adult, p_kid)` for a raw feature row; stored standardization is
    /// applied first when present.
    pub fn predict_proba(&self, x: &[f64]) -> Result<(f64, f64), LearnError> {
        if x.len() != self.input_dim() {
            return Err(LearnError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let transformed;
        let x = match &self.standardization {
            Some(s) => {
                transformed = s.transform_row(x);
                &transformed[..]
            }
            None => x,
        };
        let p_kid = match &self.params {
            ModelParams::Svm(m) => m.p_kid(x),
            ModelParams::Forest(m) => m.p_kid(x),
            ModelParams::Mlp(m) => m.forward(x)[1],
        };
        Ok((1.0 - p_kid, p_kid))
    }

    /// Predicted class index with the fixed tie-break: p_kid = 0.5 goes to
    /// ADULT.
    pub fn predict_class(&self, x: &[f64]) -> Result<usize, LearnError> {
        let (_, p_kid) = self.predict_proba(x)?;
        Ok(usize::from(p_kid > 0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_column_standardizes_to_unit() {
        let m = LabeledMatrix::new(
            vec![vec![1.0], vec![3.0]],
            vec![0, 1],
            vec!["x".to_string()],
        )
        .standardize_fit_transform();
        assert_eq!(m.features, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let m = LabeledMatrix::new(
            vec![vec![5.0], vec![5.0], vec![5.0]],
            vec![0, 1, 0],
            vec!["x".to_string()],
        )
        .standardize_fit_transform();
        assert!(m.features.iter().all(|r| r[0] == 0.0));
    }

    #[test]
    fn row_equal_to_training_mean_centers_to_zero() {
        let m = LabeledMatrix::new(
            vec![vec![2.0, 10.0], vec![4.0, 30.0]],
            vec![0, 1],
            vec!["a".into(), "b".into()],
        )
        .standardize_fit_transform();
        let stats = m.standardization.as_ref().unwrap();
        assert_eq!(stats.transform_row(&[3.0, 20.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn transform_is_idempotent_through_stats_round_trip() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 8.0], vec![-1.0, 5.0]];
        let stats = Standardization::fit(&rows);
        for row in &rows {
            let z = stats.transform_row(row);
            // Invert, then transform again: must land on the same z.
            let back: Vec<f64> = z
                .iter()
                .zip(stats.mean.iter().zip(&stats.stddev))
                .map(|(&v, (&m, &s))| v * s + m)
                .collect();
            let z2 = stats.transform_row(&back);
            for (a, b) in z.iter().zip(&z2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
