//! Discrete AdaBoost over depth-1 stumps on the five stacked probabilities.
//!
//! Stump thresholds come from midpoints of the sorted distinct values of
//! each input, searched exhaustively with both polarities every round. The
//! weighted error is clamped into [1e-10, 1 - 1e-10] before computing
//! alpha = ln((1 - e) / e) / 2, sample weights are renormalized to sum 1
//! each round, and the running training-error bound prod 2*sqrt(e(1-e)) is
//! recorded so its monotone decrease can be asserted.

use super::{StackInput, STACK_DIM, STACK_INPUT_NAMES};
use crate::learn::LearnError;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const EPSILON_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// +1: predict KID above the threshold; -1: predict KID at or below it.
    pub polarity: i8,
}

impl Stump {
    /// +1 for KID, -1 for ADULT.
    pub fn predict(&self, x: &[f64; STACK_DIM]) -> i8 {
        let above = x[self.feature] > self.threshold;
        if above == (self.polarity > 0) {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub stump: Stump,
    pub alpha: f64,
    /// Clamped weighted error this round.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub rounds: Vec<BoostRound>,
    pub n_rounds: usize,
    pub epsilon_clamp: f64,
    /// Running product 2*sqrt(e_t (1 - e_t)) after each round.
    pub bound_history: Vec<f64>,
}

impl AdaBoostModel {
    /// Additive score F(x); positive means KID.
    pub fn score(&self, x: &[f64; STACK_DIM]) -> f64 {
        self.rounds
            .iter()
            .map(|r| r.alpha * f64::from(r.stump.predict(x)))
            .sum()
    }

    /// Class index with the fixed tie-break to ADULT at score 0.
    pub fn predict_class(&self, x: &[f64; STACK_DIM]) -> usize {
        usize::from(self.score(x) > 0.0)
    }

    /// Logistic link p(KID) = 1 / (1 + exp(-2 F(x))).
    pub fn p_kid(&self, x: &[f64; STACK_DIM]) -> f64 {
        1.0 / (1.0 + (-2.0 * self.score(x)).exp())
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        let env = serde_json::json!({
            "format_version": crate::learn::persist::FORMAT_VERSION,
            "model_kind": "adaboost_stacker",
            "standardization": null,
            "parameters": self,
            "hyperparameters": { "n_rounds": self.n_rounds, "epsilon_clamp": self.epsilon_clamp },
            "seed": 0,
            "feature_names": STACK_INPUT_NAMES,
        });
        fs::write(path, serde_json::to_string(&env)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let env: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        if env["model_kind"] != "adaboost_stacker" {
            return Err(LearnError::BadModel(format!(
                "expected adaboost_stacker, found {}",
                env["model_kind"]
            )));
        }
        Ok(serde_json::from_value(env["parameters"].clone())?)
    }
}

/// Exhaustive best stump under the current weights. Returns the stump and
/// its raw (unclamped) weighted error.
fn best_stump(inputs: &[StackInput], y: &[f64], w: &[f64]) -> (Stump, f64) {
    let mut best = (
        Stump {
            feature: 0,
            threshold: 0.5,
            polarity: 1,
        },
        f64::INFINITY,
    );
    for feature in 0..STACK_DIM {
        let mut vals: Vec<f64> = inputs.iter().map(|s| s.0[feature]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for pair in vals.windows(2) {
            let threshold = 0.5 * (pair[0] + pair[1]);
            // Error for polarity +1; polarity -1 flips every prediction.
            let err_pos: f64 = inputs
                .iter()
                .zip(y.iter().zip(w))
                .map(|(x, (&yi, &wi))| {
                    let pred = if x.0[feature] > threshold { 1.0 } else { -1.0 };
                    if pred != yi {
                        wi
                    } else {
                        0.0
                    }
                })
                .sum();
            let total: f64 = w.iter().sum();
            for (polarity, err) in [(1i8, err_pos), (-1i8, total - err_pos)] {
                if err < best.1 {
                    best = (
                        Stump {
                            feature,
                            threshold,
                            polarity,
                        },
                        err,
                    );
                }
            }
        }
    }
    best
}

/// Boost stumps over the stacked probabilities. Stops early when a stump is
/// perfect (error at the clamp) or no stump beats chance.
pub fn train_stacker(
    inputs: &[StackInput],
    labels: &[usize],
    n_rounds: usize,
) -> Result<AdaBoostModel, LearnError> {
    assert_eq!(inputs.len(), labels.len());
    let n = inputs.len();
    let kid_count = labels.iter().filter(|&&l| l == 1).count();
    if n == 0 || kid_count == 0 || kid_count == n {
        return Err(LearnError::SingleClassData);
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let mut w = vec![1.0 / n as f64; n];
    let mut rounds = Vec::with_capacity(n_rounds);
    let mut bound_history = Vec::with_capacity(n_rounds);
    let mut bound = 1.0f64;

    for _ in 0..n_rounds {
        let (stump, raw_err) = best_stump(inputs, &y, &w);
        if !raw_err.is_finite() || raw_err >= 0.5 {
            // No stump beats chance; further rounds would not change weights.
            break;
        }
        let eps = raw_err.clamp(EPSILON_CLAMP, 1.0 - EPSILON_CLAMP);
        let alpha = 0.5 * ((1.0 - eps) / eps).ln();
        bound *= 2.0 * (eps * (1.0 - eps)).sqrt();
        bound_history.push(bound);
        rounds.push(BoostRound {
            stump,
            alpha,
            epsilon: eps,
        });

        let preds: Vec<f64> = inputs.iter().map(|x| f64::from(stump.predict(&x.0))).collect();
        for ((wi, &yi), &hi) in w.iter_mut().zip(&y).zip(&preds) {
            *wi *= (-alpha * yi * hi).exp();
        }
        let sum: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= sum;
        }

        if raw_err <= EPSILON_CLAMP {
            // Perfect stump: the ensemble is that stump's decision.
            break;
        }
    }

    Ok(AdaBoostModel {
        rounds,
        n_rounds,
        epsilon_clamp: EPSILON_CLAMP,
        bound_history,
    })
}
