//! Supervised entropy-based discretization with the MDL stopping rule.
//!
//! A feature is split recursively: at each level the boundary point that
//! minimises the class-information entropy of the induced two-way partition
//! is taken, provided its information gain exceeds
//! `(log2(N - 1) + delta) / N`, with
//! `delta = log2(3^k - 2) - (k*H(S) - k1*H(S1) - k2*H(S2))`
//! and `k`, `k1`, `k2` the number of classes present in each part.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cut points of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCuts {
    pub name: String,
    pub cuts: Vec<f64>,
}

impl FeatureCuts {
    pub fn arity(&self) -> u32 {
        self.cuts.len() as u32 + 1
    }
}

/// Per-feature cut points mapping continuous values to codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DiscretizationModel {
    pub features: Vec<FeatureCuts>,
}

impl DiscretizationModel {
    pub fn get(&self, name: &str) -> Option<&FeatureCuts> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        for f in &model.features {
            if f.cuts.iter().any(|c| !c.is_finite()) || f.cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!(
                    "cut points of '{}' must be finite and strictly increasing",
                    f.name
                )));
            }
        }
        Ok(model)
    }
}

/// Fits MDL cut points for one feature.
pub fn fit_cuts(values: &[f64], labels: &[u32]) -> Result<Vec<f64>> {
    if values.len() != labels.len() {
        return Err(Error::input(format!(
            "{} values but {} labels",
            values.len(),
            labels.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::input("cannot discretize an empty column"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::input("NaN among values to discretize"));
    }
    let n_classes = labels.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut pairs: Vec<(f64, u32)> = values.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let groups = group_by_value(&pairs, n_classes);

    let mut cuts = Vec::new();
    split(&groups, n_classes, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    Ok(cuts)
}

/// Code of `value`: the number of cut points `<= value`, so a value equal
/// to a cut falls into the upper bin.
pub fn apply_cut(cuts: &[f64], value: f64) -> Result<u32> {
    if value.is_nan() {
        return Err(Error::input("NaN value cannot be discretized"));
    }
    Ok(cuts.partition_point(|&c| c <= value) as u32)
}

pub fn apply(cuts: &[f64], values: &[f64]) -> Result<Vec<u32>> {
    values.iter().map(|&v| apply_cut(cuts, v)).collect()
}

/// Instances sharing one distinct value.
struct ValueGroup {
    value: f64,
    counts: Vec<usize>,
}

fn group_by_value(sorted: &[(f64, u32)], n_classes: usize) -> Vec<ValueGroup> {
    let mut groups: Vec<ValueGroup> = Vec::new();
    for &(v, c) in sorted {
        match groups.last_mut() {
            Some(g) if g.value == v => g.counts[c as usize] += 1,
            _ => {
                let mut counts = vec![0; n_classes];
                counts[c as usize] += 1;
                groups.push(ValueGroup { value: v, counts });
            }
        }
    }
    groups
}

fn class_entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn present(counts: &[usize]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// The only class seen in a group, if it is pure.
fn sole_class(counts: &[usize]) -> Option<usize> {
    let mut found = None;
    for (c, &k) in counts.iter().enumerate() {
        if k > 0 {
            if found.is_some() {
                return None;
            }
            found = Some(c);
        }
    }
    found
}

/// A cut between two adjacent distinct values can only be optimal if the
/// two groups are not both pure in the same class.
pub(crate) fn is_boundary(left: &[usize], right: &[usize]) -> bool {
    match (sole_class(left), sole_class(right)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    }
}

fn split(groups: &[ValueGroup], n_classes: usize, cuts: &mut Vec<f64>) {
    if groups.len() < 2 {
        return;
    }
    let mut total = vec![0usize; n_classes];
    for g in groups {
        for (t, &c) in total.iter_mut().zip(&g.counts) {
            *t += c;
        }
    }
    let n: usize = total.iter().sum();
    let nf = n as f64;

    let mut left = vec![0usize; n_classes];
    // (boundary index, weighted entropy, left counts)
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    for i in 0..groups.len() - 1 {
        for (l, &c) in left.iter_mut().zip(&groups[i].counts) {
            *l += c;
        }
        if !is_boundary(&groups[i].counts, &groups[i + 1].counts) {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let nl: usize = left.iter().sum();
        let e = (nl as f64 * class_entropy(&left) + (n - nl) as f64 * class_entropy(&right)) / nf;
        // strict improvement keeps the leftmost of equal-entropy boundaries
        if best.as_ref().map_or(true, |b| e < b.1) {
            best = Some((i, e, left.clone()));
        }
    }
    let Some((i, _, left)) = best else {
        return;
    };
    let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
    let (gain, threshold) = mdl_gain_and_threshold(&left, &right);
    if gain <= threshold {
        return;
    }
    cuts.push(midpoint(groups[i].value, groups[i + 1].value));
    split(&groups[..=i], n_classes, cuts);
    split(&groups[i + 1..], n_classes, cuts);
}

/// Midpoint of two adjacent distinct values, nudged up to `hi` when the
/// values are neighbouring floats and the midpoint rounds onto `lo`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid > lo && mid < hi {
        mid
    } else {
        hi
    }
}

/// Information gain of a binary split and the MDL threshold it must exceed.
pub fn mdl_gain_and_threshold(left: &[usize], right: &[usize]) -> (f64, f64) {
    let total: Vec<usize> = left.iter().zip(right).map(|(a, b)| a + b).collect();
    let n: usize = total.iter().sum();
    let nl: usize = left.iter().sum();
    let nf = n as f64;
    let h = class_entropy(&total);
    let e = (nl as f64 * class_entropy(left) + (n - nl) as f64 * class_entropy(right)) / nf;
    let (k, k1, k2) = (present(&total) as f64, present(left) as f64, present(right) as f64);
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h - k1 * class_entropy(left) - k2 * class_entropy(right));
    (h - e, ((nf - 1.0).log2() + delta) / nf)
}
