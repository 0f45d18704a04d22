//! Naive Bayes and nearest-neighbour classifiers over discrete codes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::DiscreteTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Nbc,
    Knn,
}

impl Classifier {
    pub const ALL: [Classifier; 2] = [Classifier::Nbc, Classifier::Knn];
}

/// Multinomial naive Bayes with add-one smoothing of the per-class value
/// frequencies. Classes absent from the training rows are never predicted.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    log_prior: Vec<Option<f64>>,
    /// `log_lik[feature][value * n_classes + class]`
    log_lik: Vec<Vec<f64>>,
    n_classes: usize,
}

pub fn nbc_fit(train: &DiscreteTable) -> Result<NaiveBayes> {
    // tables always hold at least one row; kept for the explicit contract
    if train.n_rows() == 0 {
        return Err(Error::input("cannot fit naive Bayes on an empty training set"));
    }
    let n_classes = train.class_arity() as usize;
    let mut class_count = vec![0usize; n_classes];
    for &c in train.class() {
        class_count[c as usize] += 1;
    }
    let n = train.n_rows() as f64;
    let log_prior = class_count
        .iter()
        .map(|&c| (c > 0).then(|| (c as f64 / n).ln()))
        .collect();
    let log_lik = (0..train.n_features())
        .map(|f| {
            let arity = train.arities()[f] as usize;
            let mut counts = vec![0usize; arity * n_classes];
            for (&v, &c) in train.feature(f).iter().zip(train.class()) {
                counts[v as usize * n_classes + c as usize] += 1;
            }
            (0..arity * n_classes)
                .map(|i| {
                    let c = i % n_classes;
                    ((counts[i] + 1) as f64 / (class_count[c] + arity) as f64).ln()
                })
                .collect()
        })
        .collect();
    Ok(NaiveBayes {
        log_prior,
        log_lik,
        n_classes,
    })
}

impl NaiveBayes {
    fn initial_scores(&self) -> Vec<f64> {
        self.log_prior
            .iter()
            .map(|p| p.unwrap_or(f64::NEG_INFINITY))
            .collect()
    }

    fn add_feature(&self, scores: &mut [f64], feature: usize, value: u32) {
        let table = &self.log_lik[feature];
        let base = value as usize * self.n_classes;
        for (c, s) in scores.iter_mut().enumerate() {
            *s += table[base + c];
        }
    }

    /// Prediction from the given feature columns of `row`.
    pub fn predict_with(&self, row: &[u32], features: &[usize]) -> u32 {
        let mut scores = self.initial_scores();
        for &f in features {
            self.add_feature(&mut scores, f, row[f]);
        }
        argmax(&scores)
    }

    pub fn predict(&self, row: &[u32]) -> u32 {
        let all: Vec<usize> = (0..self.log_lik.len()).collect();
        self.predict_with(row, &all)
    }
}

/// Highest score; ties go to the lowest class code.
fn argmax(scores: &[f64]) -> u32 {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    best as u32
}

/// k-nearest-neighbour prediction with Hamming distance over the given
/// features. Neighbours are ordered by (distance, row index); votes tie to
/// the lowest class code.
pub fn knn_predict_with(train: &DiscreteTable, row: &[u32], features: &[usize], k: usize) -> Result<u32> {
    if train.n_rows() == 0 || k == 0 {
        return Err(Error::input("kNN needs a non-empty training set and k >= 1"));
    }
    let mut dist: Vec<(usize, usize)> = (0..train.n_rows())
        .map(|i| {
            let d = features.iter().filter(|&&f| train.feature(f)[i] != row[f]).count();
            (d, i)
        })
        .collect();
    dist.sort_unstable();
    let mut votes = vec![0usize; train.class_arity() as usize];
    for &(_, i) in dist.iter().take(k) {
        votes[train.class()[i] as usize] += 1;
    }
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    Ok(best as u32)
}

/// 1-NN over all features.
pub fn knn_predict(train: &DiscreteTable, row: &[u32]) -> Result<u32> {
    let all: Vec<usize> = (0..train.n_features()).collect();
    knn_predict_with(train, row, &all, 1)
}

/// Misclassification counts on `test` using the feature prefixes
/// `ranked[..1], ranked[..2], ...`. Entry `k - 1` is the count for the
/// top-`k` features.
pub fn prefix_errors(classifier: Classifier, train: &DiscreteTable, test: &DiscreteTable, ranked: &[usize]) -> Result<Vec<usize>> {
    let mut errors = vec![0usize; ranked.len()];
    if ranked.is_empty() {
        return Ok(errors);
    }
    match classifier {
        Classifier::Nbc => {
            let model = nbc_fit(train)?;
            for i in 0..test.n_rows() {
                let row = test.row(i);
                let truth = test.class()[i];
                let mut scores = model.initial_scores();
                for (k, &f) in ranked.iter().enumerate() {
                    model.add_feature(&mut scores, f, row[f]);
                    if argmax(&scores) != truth {
                        errors[k] += 1;
                    }
                }
            }
        }
        Classifier::Knn => {
            let n_train = train.n_rows();
            let mut dist = vec![0usize; n_train];
            for i in 0..test.n_rows() {
                let row = test.row(i);
                let truth = test.class()[i];
                dist.iter_mut().for_each(|d| *d = 0);
                for (k, &f) in ranked.iter().enumerate() {
                    let col = train.feature(f);
                    for (d, &v) in dist.iter_mut().zip(col) {
                        if v != row[f] {
                            *d += 1;
                        }
                    }
                    // strict `<` keeps the lowest index among equal distances
                    let mut nearest = 0;
                    for j in 1..n_train {
                        if dist[j] < dist[nearest] {
                            nearest = j;
                        }
                    }
                    if train.class()[nearest] != truth {
                        errors[k] += 1;
                    }
                }
            }
        }
    }
    Ok(errors)
}
