//! Bag-of-words vocabulary over command transcripts.
//!
//! Tokenization is lowercase with splits on non-alphanumeric runs. The
//! vocabulary keeps the `max_vocab` most frequent training tokens, ties
//! broken lexicographically, so construction is order-independent.

use super::{ContextError, Partition, UtteranceRecord};
use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// Words with their training frequency, most frequent first.
    words: Vec<(String, u64)>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_sorted(words: Vec<(String, u64)>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i))
            .collect();
        Self { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|(w, _)| w.as_str())
    }

    /// Ordered word-per-line text with counts.
    pub fn save(&self, path: &Path) -> Result<(), ContextError> {
        let mut out = fs::File::create(path)?;
        for (word, count) in &self.words {
            writeln!(out, "{word} {count}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ContextError> {
        let file = fs::File::open(path)?;
        let mut words = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            let count: u64 = parts.next().and_then(|c| c.parse().ok()).unwrap_or(0);
            words.push((word, count));
        }
        Ok(Self::from_sorted(words))
    }
}

/// Build the top-`max_vocab` vocabulary from training transcripts. Refuses
/// records tagged as test so no test token can leak into the feature space.
pub fn build_vocabulary(
    train_records: &[UtteranceRecord],
    max_vocab: usize,
) -> Result<Vocabulary, ContextError> {
    if train_records
        .iter()
        .any(|r| r.partition == Some(Partition::Test))
    {
        return Err(ContextError::TestLeakage { what: "vocabulary" });
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for rec in train_records {
        for tok in tokenize(&rec.transcript) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(ContextError::EmptyCorpus);
    }
    let mut words: Vec<(String, u64)> = counts.into_iter().collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    words.truncate(max_vocab);
    Ok(Vocabulary::from_sorted(words))
}

/// Raw token counts over the vocabulary; out-of-vocabulary tokens are
/// ignored and an empty transcript maps to the zero vector.
pub fn bow_vector(transcript: &str, vocab: &Vocabulary) -> Vec<f64> {
    let mut v = vec![0.0; vocab.len()];
    for tok in tokenize(transcript) {
        if let Some(i) = vocab.position(&tok) {
            v[i] += 1.0;
        }
    }
    v
}
