//! Brute-force nearest neighbors over a word list and over n-gram rows.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{cosine_unchecked, Model};
use crate::scalar::Scalar;
use crate::vocab::{encode, normalize, CaseMode, NGramVocab};

/// Words with precomputed embeddings.
#[derive(Debug, Clone)]
pub struct WorkingVocab<T> {
    /// First spelling seen for each normalized form.
    pub words: Vec<String>,
    keys: Vec<String>,
    pub embeddings: Vec<Vec<T>>,
}

impl<T> WorkingVocab<T> {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn build_working_vocab<T: Scalar, S: AsRef<str>>(
    words: &[S],
    model: &Model<T>,
    vocab: &NGramVocab,
    case: CaseMode,
) -> Result<WorkingVocab<T>> {
    if words.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut seen = HashSet::new();
    let mut wv = WorkingVocab { words: Vec::new(), keys: Vec::new(), embeddings: Vec::new() };
    for w in words {
        let seq = normalize(w.as_ref(), case);
        let key = seq.inner();
        if !seen.insert(key.clone()) {
            continue;
        }
        wv.embeddings.push(model.embed(&encode(&seq, vocab))?.values);
        wv.words.push(w.as_ref().trim().to_string());
        wv.keys.push(key);
    }
    Ok(wv)
}

/// Descending score, then ascending label.
fn rank<T: Scalar>(mut scored: Vec<(String, T)>, k: usize) -> Vec<(String, T)> {
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// The `k` working-vocabulary words closest to `query` by cosine, skipping
/// any word whose normalized form equals the query's.
pub fn nearest_neighbors<T: Scalar>(
    query: &str,
    wv: &WorkingVocab<T>,
    model: &Model<T>,
    vocab: &NGramVocab,
    case: CaseMode,
    k: usize,
) -> Result<Vec<(String, T)>> {
    let seq = normalize(query, case);
    let key = seq.inner();
    let q = model.embed(&encode(&seq, vocab))?.values;
    let scored = wv
        .words
        .iter()
        .zip(&wv.keys)
        .zip(&wv.embeddings)
        .filter(|((_, wkey), _)| **wkey != key)
        .map(|((word, _), emb)| (word.clone(), cosine_unchecked(&q, emb)))
        .collect();
    Ok(rank(scored, k))
}

/// The `k` vocabulary n-grams whose rows of `W` are closest to the query's row.
pub fn ngram_neighbors<T: Scalar>(query: &str, model: &Model<T>, vocab: &NGramVocab, k: usize) -> Result<Vec<(String, T)>> {
    let q = vocab.get(query).ok_or_else(|| Error::NgramNotInModel(query.to_string()))?;
    model.check_vocab(vocab)?;
    let qrow = model.row(q);
    let scored = vocab
        .entries()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != q)
        .map(|(i, e)| (e.ngram.clone(), cosine_unchecked(qrow, model.row(i))))
        .collect();
    Ok(rank(scored, k))
}
