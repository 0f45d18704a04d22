//! Comparison selectors: MIM, mRMR, CMIM, FCBF and ReliefF, plus the
//! [`MethodConfig`] dispatcher shared with RCDFS.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, mutual_information, symmetrical_uncertainty};
use crate::rcdfs::{relevances, select_fast};
use crate::table::{DiscreteTable, Var};
use crate::trace::{argmax_lowest, Method, SelectionStep, SelectionTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub delta: usize,
    pub fcbf_gamma: f64,
    pub relieff_neighbors: usize,
    pub relieff_sample: usize,
    pub seed: u64,
}

impl MethodConfig {
    pub fn new(method: Method, delta: usize) -> Self {
        Self {
            method,
            delta,
            fcbf_gamma: 0.0,
            relieff_neighbors: 5,
            relieff_sample: 30,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta == 0 {
            return Err(Error::input("delta must be at least 1"));
        }
        if !(self.fcbf_gamma >= 0.0) {
            return Err(Error::input("FCBF gamma must be non-negative"));
        }
        if self.relieff_neighbors == 0 || self.relieff_sample == 0 {
            return Err(Error::input("ReliefF neighbours and sample size must be at least 1"));
        }
        Ok(())
    }
}

/// Runs the configured method. FCBF ignores `delta` and returns its native
/// subset.
pub fn run_method(table: &DiscreteTable, config: &MethodConfig) -> Result<SelectionTrace> {
    config.validate()?;
    match config.method {
        Method::Rcdfs => select_fast(table, config.delta),
        Method::Mim => mim_rank(table, config.delta),
        Method::Mrmr => mrmr_select(table, config.delta),
        Method::Cmim => cmim_select(table, config.delta),
        Method::Fcbf => fcbf_select(table, config.fcbf_gamma),
        Method::Relieff => relieff_rank(table, config),
    }
}

fn check_delta(table: &DiscreteTable, delta: usize) -> Result<()> {
    if delta == 0 || delta > table.n_features() {
        return Err(Error::input(format!(
            "delta must lie in [1, {}], got {delta}",
            table.n_features()
        )));
    }
    Ok(())
}

/// Stable descending order by score, lowest index first among equal scores.
fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

fn plain_step(feature: usize, score: f64, relevance: Option<f64>) -> SelectionStep {
    SelectionStep {
        feature,
        score,
        relevance,
        pair_cor: None,
        sigma: None,
        phi: None,
    }
}

/// Top `delta` features by I(F;C).
pub fn mim_rank(table: &DiscreteTable, delta: usize) -> Result<SelectionTrace> {
    check_delta(table, delta)?;
    let rel = relevances(table)?;
    let mut trace = SelectionTrace::new(Method::Mim, delta);
    for f in rank_desc(&rel).into_iter().take(delta) {
        trace.push(plain_step(f, rel[f], Some(rel[f])));
    }
    Ok(trace)
}

/// Greedy forward search over `score(candidate, selected)`; the first pick
/// is always the most relevant feature.
fn greedy<F>(table: &DiscreteTable, method: Method, delta: usize, mut score: F) -> Result<SelectionTrace>
where
    F: FnMut(usize, &[usize]) -> Result<f64>,
{
    check_delta(table, delta)?;
    let rel = relevances(table)?;
    let mut trace = SelectionTrace::new(method, delta);
    let mut remaining: Vec<usize> = (0..table.n_features()).collect();
    while trace.selected.len() < delta {
        let scored = if trace.selected.is_empty() {
            remaining.iter().map(|&f| (f, rel[f])).collect::<Vec<_>>()
        } else {
            remaining
                .iter()
                .map(|&f| score(f, &trace.selected).map(|s| (f, s)))
                .collect::<Result<Vec<_>>>()?
        };
        let (f, s) = argmax_lowest(&scored).expect("candidates remain");
        remaining.retain(|&r| r != f);
        trace.push(plain_step(f, s, Some(rel[f])));
    }
    Ok(trace)
}

/// mRMR with the averaged redundancy penalty:
/// `J(F) = I(F;C) - (1/|S|) * sum over Fs of I(F;Fs)`.
pub fn mrmr_select(table: &DiscreteTable, delta: usize) -> Result<SelectionTrace> {
    let rel = relevances(table)?;
    // running sum of I(F;Fs) over the selected set, extended by the newest pick
    let mut penalty = vec![0.0; table.n_features()];
    greedy(table, Method::Mrmr, delta, |f, selected| {
        let newest = *selected.last().expect("non-empty");
        penalty[f] += mutual_information(table, Var::Feature(f), Var::Feature(newest))?;
        Ok(rel[f] - penalty[f] / selected.len() as f64)
    })
}

/// CMIM: `J(F) = min over Fs in S of I(F;C|Fs)`, with `I(F;C)` for empty S.
pub fn cmim_select(table: &DiscreteTable, delta: usize) -> Result<SelectionTrace> {
    let mut partial = vec![f64::INFINITY; table.n_features()];
    greedy(table, Method::Cmim, delta, |f, selected| {
        let newest = *selected.last().expect("non-empty");
        let cmi = conditional_mutual_information(table, Var::Feature(f), Var::Class, Var::Feature(newest))?;
        partial[f] = partial[f].min(cmi);
        Ok(partial[f])
    })
}

/// FCBF with threshold `gamma`. Features with SU(F;C) <= gamma are dropped;
/// walking the remaining list in descending SU order, each survivor removes
/// every later F2 with SU(F1;F2) >= SU(F2;C).
pub fn fcbf_select(table: &DiscreteTable, gamma: f64) -> Result<SelectionTrace> {
    if !(gamma >= 0.0) {
        return Err(Error::input("FCBF gamma must be non-negative"));
    }
    let su_c = (0..table.n_features())
        .map(|f| symmetrical_uncertainty(table, Var::Feature(f), Var::Class))
        .collect::<Result<Vec<_>>>()?;
    let mut list: Vec<usize> = rank_desc(&su_c).into_iter().filter(|&f| su_c[f] > gamma).collect();
    let mut i = 0;
    while i < list.len() {
        let head = list[i];
        let mut kept = list[..=i].to_vec();
        for &other in &list[i + 1..] {
            let su_pair = symmetrical_uncertainty(table, Var::Feature(head), Var::Feature(other))?;
            if su_pair < su_c[other] {
                kept.push(other);
            }
        }
        list = kept;
        i += 1;
    }
    let mut trace = SelectionTrace::new(Method::Fcbf, list.len());
    for f in list {
        trace.push(plain_step(f, su_c[f], None));
    }
    Ok(trace)
}

/// ReliefF feature weights on discrete codes (diff = 0 if equal, else 1).
///
/// `min(relieff_sample, n_rows)` distinct rows are drawn with a seeded
/// generator. For each, the `k` nearest hits and, per other class, the `k`
/// nearest misses (Hamming distance, ties by row index) update the weights;
/// misses are weighted by `P(class) / (1 - P(class of row))`.
pub fn relieff_weights(table: &DiscreteTable, neighbors: usize, sample_size: usize, seed: u64) -> Result<Vec<f64>> {
    if neighbors == 0 || sample_size == 0 {
        return Err(Error::input("ReliefF neighbours and sample size must be at least 1"));
    }
    let n = table.n_rows();
    let class = table.class();
    let n_classes = table.class_arity() as usize;
    let mut class_count = vec![0usize; n_classes];
    for &c in class {
        class_count[c as usize] += 1;
    }
    if class_count.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::input("ReliefF needs at least two classes present"));
    }
    let prior: Vec<f64> = class_count.iter().map(|&c| c as f64 / n as f64).collect();
    let n_feat = table.n_features();
    let rows: Vec<Vec<u32>> = (0..n).map(|i| table.row(i)).collect();

    let m = sample_size.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = sample(&mut rng, n, m).into_vec();
    picks.sort_unstable();

    let mut weights = vec![0.0; n_feat];
    for &r in &picks {
        let target = &rows[r];
        let rc = class[r] as usize;
        // (distance, index) for every other row, bucketed by class
        let mut by_class: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_classes];
        for (i, row) in rows.iter().enumerate() {
            if i == r {
                continue;
            }
            let d = row.iter().zip(target).filter(|(a, b)| a != b).count();
            by_class[class[i] as usize].push((d, i));
        }
        for bucket in &mut by_class {
            bucket.sort_unstable();
            bucket.truncate(neighbors);
        }
        let hits = &by_class[rc];
        if !hits.is_empty() {
            let w = 1.0 / (m as f64 * hits.len() as f64);
            for &(_, h) in hits {
                for (f, wf) in weights.iter_mut().enumerate() {
                    if rows[h][f] != target[f] {
                        *wf -= w;
                    }
                }
            }
        }
        for (c, misses) in by_class.iter().enumerate() {
            if c == rc || misses.is_empty() {
                continue;
            }
            let w = prior[c] / (1.0 - prior[rc]) / (m as f64 * misses.len() as f64);
            for &(_, h) in misses {
                for (f, wf) in weights.iter_mut().enumerate() {
                    if rows[h][f] != target[f] {
                        *wf += w;
                    }
                }
            }
        }
    }
    Ok(weights)
}

/// Top `delta` features by ReliefF weight.
pub fn relieff_rank(table: &DiscreteTable, config: &MethodConfig) -> Result<SelectionTrace> {
    check_delta(table, config.delta)?;
    let weights = relieff_weights(table, config.relieff_neighbors, config.relieff_sample, config.seed)?;
    let mut trace = SelectionTrace::new(Method::Relieff, config.delta);
    for f in rank_desc(&weights).into_iter().take(config.delta) {
        trace.push(plain_step(f, weights[f], None));
    }
    trace.weights = Some(weights);
    trace.seed = Some(config.seed);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use approx::assert_abs_diff_eq;

    /// XOR pair, one feature equal to the class, one balanced noise feature.
    fn xor_plus_class() -> DiscreteTable {
        let base = synth::xor_with_balanced_noise(2);
        let mut cols: Vec<Vec<u32>> = (0..3).map(|j| base.feature(j).to_vec()).collect();
        cols.push(base.class().to_vec());
        DiscreteTable::new(cols, base.class().to_vec()).unwrap()
    }

    #[test]
    fn mim_examples() {
        let t = xor_plus_class();
        let tr = mim_rank(&t, 4).unwrap();
        assert_eq!(tr.selected[0], 3);
        // remaining relevances are all zero: index order decides
        assert_eq!(&tr.selected[1..], &[0, 1, 2]);

        let single = DiscreteTable::new(vec![vec![0, 1, 1]], vec![0, 1, 1]).unwrap();
        assert_eq!(mim_rank(&single, 1).unwrap().selected, vec![0]);

        let dup = synth::duplicate_table(4);
        assert_eq!(mim_rank(&dup, 2).unwrap().selected, vec![0, 1]);
        assert!(mim_rank(&dup, 4).is_err());
    }

    #[test]
    fn mrmr_examples() {
        let dup = synth::duplicate_table(4);
        assert_eq!(mrmr_select(&dup, 2).unwrap().selected, vec![0, 2]);
        assert_eq!(mrmr_select(&dup, 1).unwrap().selected, vec![0]);
        let t = xor_plus_class();
        assert_eq!(mrmr_select(&t, 1).unwrap().selected, vec![3]);
    }

    #[test]
    fn mrmr_equals_mim_on_independent_features() {
        // full factorial over three features; class is the first feature's code
        let base = synth::product_table(&[2, 3, 2], 2);
        let cols: Vec<Vec<u32>> = (0..3).map(|j| base.feature(j).to_vec()).collect();
        let class: Vec<u32> = (0..base.n_rows()).map(|i| (cols[1][i] + cols[2][i]) % 2).collect();
        let t = DiscreteTable::new(cols, class).unwrap();
        assert_eq!(mrmr_select(&t, 3).unwrap().selected, mim_rank(&t, 3).unwrap().selected);
    }

    #[test]
    fn cmim_examples() {
        let dup = synth::duplicate_table(4);
        let tr = cmim_select(&dup, 2).unwrap();
        assert_eq!(tr.selected, vec![0, 2]);
        assert_abs_diff_eq!(tr.steps[1].score, 0.5, epsilon = 1e-12);

        let t = synth::xor_with_balanced_noise(2);
        let tr = cmim_select(&t, 2).unwrap();
        assert_eq!(tr.selected, vec![0, 1]);
        assert_abs_diff_eq!(tr.steps[1].score, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fcbf_examples() {
        let dup = synth::duplicate_table(4);
        let tr = fcbf_select(&dup, 0.0).unwrap();
        assert_eq!(tr.selected, vec![0, 2]);
        assert_eq!(tr.delta, 2);

        let base = synth::product_table(&[2, 2], 2);
        let cols: Vec<Vec<u32>> = (0..2).map(|j| base.feature(j).to_vec()).collect();
        let class: Vec<u32> = (0..base.n_rows()).map(|i| cols[0][i] * 2 + cols[1][i]).collect();
        let t = DiscreteTable::new(cols, class).unwrap();
        assert_eq!(fcbf_select(&t, 0.0).unwrap().selected, vec![0, 1]);
        assert!(fcbf_select(&t, 0.9).unwrap().selected.is_empty());
        assert!(fcbf_select(&t, -1.0).is_err());
    }

    #[test]
    fn relieff_examples() {
        let t = xor_plus_class();
        let cfg = MethodConfig {
            delta: 4,
            ..MethodConfig::new(Method::Relieff, 4)
        };
        let tr = relieff_rank(&t, &cfg).unwrap();
        let w = tr.weights.clone().unwrap();
        let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(w[3], max);
        assert_eq!(tr.selected[0], 3);
        assert!(w.iter().all(|x| (-1.0..=1.0).contains(x)));
        assert_eq!(relieff_rank(&t, &cfg).unwrap(), tr);

        let constant = DiscreteTable::new(vec![vec![0; 6], vec![0, 1, 0, 1, 1, 0]], vec![0, 1, 0, 1, 1, 0]).unwrap();
        let w = relieff_weights(&constant, 5, 30, 1).unwrap();
        assert_eq!(w[0], 0.0);

        let single = DiscreteTable::new(vec![vec![0, 1]], vec![0, 0]).unwrap();
        assert!(relieff_weights(&single, 5, 30, 1).is_err());
    }

    #[test]
    fn run_method_dispatches() {
        let dup = synth::duplicate_table(4);
        for m in Method::ALL {
            let tr = run_method(&dup, &MethodConfig::new(m, 2)).unwrap();
            assert_eq!(tr.method, m);
        }
        let mut bad = MethodConfig::new(Method::Mim, 0);
        assert!(run_method(&dup, &bad).is_err());
        bad.delta = 1;
        bad.relieff_neighbors = 0;
        assert!(bad.validate().is_err());
    }
}
