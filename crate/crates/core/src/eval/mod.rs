//! Experiment protocol: class balancing, stratified splits, cross
//! validation, and report assembly.

use crate::context::{Gender, Label, Partition, UtteranceRecord};
use crate::learn::{LabeledMatrix, LearnError, TrainedModel};
use crate::seed::substream;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Downsample the majority class (without replacement) to the minority size
/// and shuffle the result deterministically.
pub fn balance_classes(records: &[UtteranceRecord], seed: u64) -> Vec<UtteranceRecord> {
    let mut by_class: [Vec<&UtteranceRecord>; 2] = [Vec::new(), Vec::new()];
    for rec in records {
        let label = rec.label.expect("balance_classes requires labeled records");
        by_class[label.class_index()].push(rec);
    }
    let minority = by_class[0].len().min(by_class[1].len());
    let mut out: Vec<UtteranceRecord> = Vec::with_capacity(2 * minority);
    for (class, group) in by_class.iter_mut().enumerate() {
        let mut rng = substream(seed, "balance-class", class as u64);
        group.shuffle(&mut rng);
        out.extend(group.iter().take(minority).map(|r| (*r).clone()));
    }
    let mut rng = substream(seed, "balance-order", 0);
    out.shuffle(&mut rng);
    out
}

/// Stratified train/test split. The train side gets `round(ratio * n)`
/// records with per-class counts assigned by largest remainder, and both
/// sides come back tagged with their partition.
pub fn split_train_test(
    records: &[UtteranceRecord],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<UtteranceRecord>, Vec<UtteranceRecord>), LearnError> {
    assert!((0.0..1.0).contains(&ratio), "ratio must be in (0, 1)");
    let mut by_class: [Vec<&UtteranceRecord>; 2] = [Vec::new(), Vec::new()];
    for rec in records {
        let label = rec.label.expect("split requires labeled records");
        by_class[label.class_index()].push(rec);
    }
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(LearnError::SingleClassData);
    }

    let n = records.len();
    let train_total = (ratio * n as f64).round() as usize;
    // Largest-remainder apportionment of the train quota across classes.
    let mut quota = [0usize; 2];
    let mut fracs = [(0.0f64, 0usize); 2];
    let mut assigned = 0usize;
    for c in 0..2 {
        let exact = ratio * by_class[c].len() as f64;
        quota[c] = exact.floor() as usize;
        fracs[c] = (exact - exact.floor(), c);
        assigned += quota[c];
    }
    fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, c) in fracs.iter().take(train_total.saturating_sub(assigned)) {
        quota[c] += 1;
    }
    for c in 0..2 {
        quota[c] = quota[c].min(by_class[c].len());
    }

    let mut train = Vec::with_capacity(train_total);
    let mut test = Vec::with_capacity(n - train_total);
    for (c, group) in by_class.iter_mut().enumerate() {
        let mut rng = substream(seed, "split-class", c as u64);
        group.shuffle(&mut rng);
        for (i, rec) in group.iter().enumerate() {
            let mut rec = (*rec).clone();
            if i < quota[c] {
                rec.partition = Some(Partition::Train);
                train.push(rec);
            } else {
                rec.partition = Some(Partition::Test);
                test.push(rec);
            }
        }
    }
    Ok((train, test))
}

/// Outcome of one cross-validation fold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FoldScore {
    Accuracy(f64),
    Failed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_scores: Vec<FoldScore>,
    pub mean_accuracy: f64,
    pub stddev_accuracy: f64,
}

/// Stratified k-fold cross validation over a feature matrix. A fold whose
/// training side degenerates to one class is reported as failed and the run
/// continues.
pub fn cross_validate(
    data: &LabeledMatrix,
    k: usize,
    seed: u64,
    trainer: &dyn Fn(&LabeledMatrix, u64) -> Result<TrainedModel, LearnError>,
) -> CvResult {
    assert!(k >= 2, "need at least two folds");
    assert!(data.n() >= k, "more folds than samples");
    let folds = stratified_folds(&data.labels, k, seed);

    let mut fold_scores = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let in_fold: Vec<bool> = {
            let mut m = vec![false; data.n()];
            for &i in fold {
                m[i] = true;
            }
            m
        };
        let train_rows: Vec<usize> = (0..data.n()).filter(|&i| !in_fold[i]).collect();
        let sub = LabeledMatrix::new(
            train_rows.iter().map(|&i| data.features[i].clone()).collect(),
            train_rows.iter().map(|&i| data.labels[i]).collect(),
            data.feature_names.clone(),
        );
        match trainer(&sub, f as u64) {
            Ok(model) => {
                let correct = fold
                    .iter()
                    .filter(|&&i| {
                        model
                            .predict_class(&data.features[i])
                            .map(|p| p == data.labels[i])
                            .unwrap_or(false)
                    })
                    .count();
                fold_scores.push(FoldScore::Accuracy(correct as f64 / fold.len() as f64));
            }
            Err(e) => fold_scores.push(FoldScore::Failed(e.to_string())),
        }
    }

    let accs: Vec<f64> = fold_scores
        .iter()
        .filter_map(|s| match s {
            FoldScore::Accuracy(a) => Some(*a),
            FoldScore::Failed(_) => None,
        })
        .collect();
    let mean = if accs.is_empty() {
        0.0
    } else {
        accs.iter().sum::<f64>() / accs.len() as f64
    };
    let var = if accs.is_empty() {
        0.0
    } else {
        accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64
    };
    CvResult {
        fold_scores,
        mean_accuracy: mean,
        stddev_accuracy: var.sqrt(),
    }
}

/// Disjoint, exhaustive, stratified folds: per class, shuffled indices are
/// dealt round-robin, with the dealing cursor carried across classes so
/// fold sizes stay within one of each other.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for class in 0..2 {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let mut rng = substream(seed, "fold-class", class as u64);
        idx.shuffle(&mut rng);
        for i in idx {
            folds[cursor % k].push(i);
            cursor += 1;
        }
    }
    folds
}

/// One scored utterance ready for report assembly.
#[derive(Debug, Clone, Copy)]
pub struct PredictionRecord {
    pub predicted: Label,
    pub truth: Label,
    pub gender: Option<Gender>,
    pub is_night: bool,
}

/// Accuracy plus confusion matrices in the fixed layout: rows are predicted
/// classes, columns are true classes, percentages normalized per column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    /// `confusion_counts[predicted][truth]`
    pub confusion_counts: [[u64; 2]; 2],
    /// Column-normalized percentages per true class.
    pub confusion_percent: [[f64; 2]; 2],
    /// `gender_confusion_counts[predicted][MALE|FEMALE|KID]`, when genders
    /// are present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gender_confusion_counts: Option<[[u64; 3]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gender_confusion_percent: Option<[[f64; 3]; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_model_accuracy: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_scores: Option<Vec<FoldScore>>,
    pub night_rule_override: bool,
}

fn gender_index(g: Gender) -> usize {
    match g {
        Gender::Male => 0,
        Gender::Female => 1,
        Gender::Kid => 2,
    }
}

/// Assemble the report. With the night rule enabled, any record whose local
/// time falls in [23:00, 06:00) is forced to ADULT before counting.
pub fn evaluate(predictions: &[PredictionRecord], night_rule_override: bool) -> EvalReport {
    assert!(!predictions.is_empty(), "nothing to evaluate");
    let mut counts = [[0u64; 2]; 2];
    let mut gender_counts = [[0u64; 3]; 2];
    let mut any_gender = false;
    let mut correct = 0usize;

    for p in predictions {
        let predicted = if night_rule_override && p.is_night {
            Label::Adult
        } else {
            p.predicted
        };
        counts[predicted.class_index()][p.truth.class_index()] += 1;
        if predicted == p.truth {
            correct += 1;
        }
        if let Some(g) = p.gender {
            any_gender = true;
            gender_counts[predicted.class_index()][gender_index(g)] += 1;
        }
    }

    let mut percent = [[0.0f64; 2]; 2];
    for truth in 0..2 {
        let col: u64 = counts[0][truth] + counts[1][truth];
        if col > 0 {
            for pred in 0..2 {
                percent[pred][truth] = 100.0 * counts[pred][truth] as f64 / col as f64;
            }
        }
    }

    let (gcounts, gpercent) = if any_gender {
        let mut gp = [[0.0f64; 3]; 2];
        for g in 0..3 {
            let col = gender_counts[0][g] + gender_counts[1][g];
            if col > 0 {
                for pred in 0..2 {
                    gp[pred][g] = 100.0 * gender_counts[pred][g] as f64 / col as f64;
                }
            }
        }
        (Some(gender_counts), Some(gp))
    } else {
        (None, None)
    };

    EvalReport {
        n: predictions.len(),
        accuracy: correct as f64 / predictions.len() as f64,
        confusion_counts: counts,
        confusion_percent: percent,
        gender_confusion_counts: gcounts,
        gender_confusion_percent: gpercent,
        per_model_accuracy: BTreeMap::new(),
        fold_scores: None,
        night_rule_override,
    }
}

impl EvalReport {
    /// Aligned text rendering of the class confusion matrix (predictions in
    /// rows, true classes in columns).
    pub fn confusion_table(&self) -> String {
        let mut out = String::new();
        out.push_str("            Adult      Kid\n");
        for (pred, name) in ["Adult", "Kid"].iter().enumerate() {
            out.push_str(&format!(
                "{name:>9} {a:>7.0}% {k:>7.0}%\n",
                a = self.confusion_percent[pred][0],
                k = self.confusion_percent[pred][1],
            ));
        }
        out
    }

    /// Aligned text rendering of the gender confusion matrix, when present.
    pub fn gender_table(&self) -> Option<String> {
        let gp = self.gender_confusion_percent?;
        let mut out = String::new();
        out.push_str("             Male   Female      Kid\n");
        for (pred, name) in ["Adult", "Kid"].iter().enumerate() {
            out.push_str(&format!(
                "{name:>9} {m:>7.0}% {f:>7.0}% {k:>7.0}%\n",
                m = gp[pred][0],
                f = gp[pred][1],
                k = gp[pred][2],
            ));
        }
        Some(out)
    }
}
