//! Nonparametric significance tests: Wilcoxon rank-sum and Friedman.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Combined sample size up to which the exact null distribution is used
/// (when there are no ties).
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Rank sum of the first sample.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Midranks (1-based) and the tie term sum(t^3 - t) over tie groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average of ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Number of size-`k` subsets of `{1..=n}` with each possible sum, indexed
/// by sum.
fn subset_sum_counts(n: usize, k: usize) -> Vec<u64> {
    let max_sum = n * (n + 1) / 2;
    // ways[j][s]: subsets of size j with sum s
    let mut ways = vec![vec![0u64; max_sum + 1]; k + 1];
    ways[0][0] = 1;
    for item in 1..=n {
        for j in (1..=k.min(item)).rev() {
            for s in (item..=max_sum).rev() {
                ways[j][s] += ways[j - 1][s - item];
            }
        }
    }
    ways.swap_remove(k)
}

/// Two-sided Wilcoxon rank-sum test with midranks for ties.
///
/// Exact p-values come from the permutation distribution of the rank sum
/// when `n_a + n_b <= 20` and no ties are present; otherwise a normal
/// approximation with tie and continuity corrections is used.
pub fn wilcoxon_rank_sum(sample_a: &[f64], sample_b: &[f64]) -> Result<RankSumResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::input("rank-sum test needs two non-empty samples"));
    }
    if sample_a.iter().chain(sample_b).any(|v| v.is_nan()) {
        return Err(Error::input("NaN in rank-sum sample"));
    }
    let (na, nb) = (sample_a.len(), sample_b.len());
    let n = na + nb;
    let combined: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let (ranks, tie_term) = midranks(&combined);
    let w: f64 = ranks[..na].iter().sum();

    if n <= EXACT_LIMIT && tie_term == 0.0 {
        let counts = subset_sum_counts(n, na);
        let total: u64 = counts.iter().sum();
        let w_int = w.round() as usize;
        let lower: u64 = counts[..=w_int].iter().sum();
        let upper: u64 = counts[w_int..].iter().sum();
        let p = (2.0 * lower.min(upper) as f64 / total as f64).min(1.0);
        return Ok(RankSumResult {
            statistic: w,
            p_value: p,
            method: PValueMethod::Exact,
        });
    }

    let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
    let mean = naf * (nf + 1.0) / 2.0;
    let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * normal.cdf(-z)).min(1.0)
    };
    Ok(RankSumResult {
        statistic: w,
        p_value: p,
        method: PValueMethod::Normal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: usize,
    /// Average within-block rank of each method (1 = lowest value).
    pub mean_ranks: Vec<f64>,
}

/// Friedman test over a methods x blocks matrix of values (e.g. error
/// rates). Methods are ranked within each block with midranks; the
/// statistic carries the usual tie correction and is referred to a
/// chi-squared distribution with `methods - 1` degrees of freedom.
pub fn friedman_test(values: &[Vec<f64>]) -> Result<FriedmanResult> {
    let k = values.len();
    if k < 2 {
        return Err(Error::input("Friedman test needs at least two methods"));
    }
    let n = values[0].len();
    if n < 2 {
        return Err(Error::input("Friedman test needs at least two blocks"));
    }
    if values.iter().any(|row| row.len() != n) {
        return Err(Error::input("every method needs a value for every block"));
    }
    if values.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::input("NaN in Friedman input"));
    }
    let mut rank_sums = vec![0.0; k];
    let mut tie_total = 0.0;
    for block in 0..n {
        let column: Vec<f64> = values.iter().map(|row| row[block]).collect();
        let (ranks, tie_term) = midranks(&column);
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        tie_total += tie_term;
    }
    let (kf, nf) = (k as f64, n as f64);
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / nf).collect();
    let centre = (kf + 1.0) / 2.0;
    let spread: f64 = mean_ranks.iter().map(|r| (r - centre) * (r - centre)).sum();
    let raw = 12.0 * nf / (kf * (kf + 1.0)) * spread;
    let correction = 1.0 - tie_total / (nf * (kf * kf * kf - kf));
    let statistic = if correction <= 0.0 { 0.0 } else { raw / correction };
    let df = k - 1;
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::input(e.to_string()))?;
    let p_value = chi.sf(statistic).clamp(0.0, 1.0);
    Ok(FriedmanResult {
        statistic,
        p_value,
        df,
        mean_ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two-sided exact p by enumerating every assignment of ranks to sample a.
    fn brute_force_p(na: usize, nb: usize, observed: f64) -> f64 {
        let n = na + nb;
        let mut lower = 0u64;
        let mut upper = 0u64;
        let mut total = 0u64;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| (i + 1) as f64).sum();
            total += 1;
            if s <= observed {
                lower += 1;
            }
            if s >= observed {
                upper += 1;
            }
        }
        (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
    }

    #[test]
    fn midranks_handle_ties() {
        let (r, t) = midranks(&[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(r, vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(t, 6.0);
    }

    #[test]
    fn separated_samples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [6.0, 7.0, 8.0, 9.0, 10.0];
        let r = wilcoxon_rank_sum(&a, &b).unwrap();
        assert_eq!(r.method, PValueMethod::Exact);
        assert!((r.p_value - 2.0 / 252.0).abs() < 1e-15);
        assert_eq!(r.statistic, 15.0);
        assert_eq!(wilcoxon_rank_sum(&b, &a).unwrap().p_value, r.p_value);
    }

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.2, 0.3];
        let r = wilcoxon_rank_sum(&a, &a).unwrap();
        assert_eq!(r.method, PValueMethod::Normal);
        assert_eq!(r.p_value, 1.0);
        let c = [0.5; 4];
        assert_eq!(wilcoxon_rank_sum(&c, &c).unwrap().p_value, 1.0);
    }

    #[test]
    fn wilcoxon_errors() {
        assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
        assert!(wilcoxon_rank_sum(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn exact_matches_enumeration() {
        for na in 1..=11 {
            for nb in 1..=(12 - na) {
                let n = na + nb;
                for w in (na * (na + 1) / 2)..=(na * (2 * n - na + 1) / 2) {
                    // build sample a with rank sum w by greedy construction
                    let mut ranks = Vec::new();
                    let mut rest = w;
                    for slot in (0..na).rev() {
                        let min_rest = slot * (slot + 1) / 2;
                        let top = n - (na - 1 - slot);
                        let pick = (rest - min_rest).min(top);
                        ranks.push(pick);
                        rest -= pick;
                    }
                    let a: Vec<f64> = ranks.iter().map(|&r| r as f64).collect();
                    let b: Vec<f64> = (1..=n).filter(|r| !ranks.contains(r)).map(|r| r as f64).collect();
                    let res = wilcoxon_rank_sum(&a, &b).unwrap();
                    assert_eq!(res.statistic, w as f64);
                    assert!((res.p_value - brute_force_p(na, nb, w as f64)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn friedman_identical_ordering() {
        let m = vec![vec![0.1; 10], vec![0.2; 10], vec![0.3; 10]];
        let r = friedman_test(&m).unwrap();
        assert!((r.statistic - 20.0).abs() < 1e-12);
        assert!((r.p_value - (-10f64).exp()).abs() < 1e-12);
        assert!((r.p_value - 4.54e-5).abs() < 1e-7);
        assert_eq!(r.mean_ranks, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn friedman_balanced_and_degenerate() {
        let m = vec![vec![0.1, 0.3, 0.1, 0.3], vec![0.2, 0.2, 0.2, 0.2]];
        let r = friedman_test(&m).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(friedman_test(&[vec![0.1], vec![0.2]]).is_err());
        assert!(friedman_test(&[vec![0.1, 0.2]]).is_err());
        assert!(friedman_test(&[vec![0.1, 0.2], vec![0.3]]).is_err());
        let tied = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        assert_eq!(friedman_test(&tied).unwrap().p_value, 1.0);
    }

    proptest! {
        #[test]
        fn friedman_is_rank_invariant(m in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 6), 3..5)) {
            let r = friedman_test(&m).unwrap();
            let transformed: Vec<Vec<f64>> = m.iter().map(|row| row.iter().map(|v| (3.0 * v).exp() + 7.0).collect()).collect();
            let t = friedman_test(&transformed).unwrap();
            prop_assert_eq!(r.statistic, t.statistic);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }

        #[test]
        fn rank_sum_is_symmetric(a in proptest::collection::vec(0.0f64..10.0, 1..15), b in proptest::collection::vec(0.0f64..10.0, 1..15)) {
            let x = wilcoxon_rank_sum(&a, &b).unwrap();
            let y = wilcoxon_rank_sum(&b, &a).unwrap();
            prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x.p_value));
        }
    }
}
