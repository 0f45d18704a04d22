//! Redundancy-complementariness dispersion feature selection.
//!
//! Each candidate `F` is scored against the selected set `S` by
//!
//! ```text
//! J(F) = I(F;C) - phi(F;S) * PairCor(F;S)
//! PairCor(F;S) = sum over Fs in S of cor(F;Fs),   cor(F;Fs) = I(F;Fs) - I(F;Fs|C)
//! phi = 1 + sigma  if PairCor >= 0
//!       1 - sigma  otherwise
//! ```
//!
//! where `sigma` is the population standard deviation of the `cor` values.
//! Positive `cor` means `Fs` already carries the class information `F`
//! would add (redundancy); negative `cor` means `F` becomes more
//! informative once `Fs` is known (complementariness). A large spread of
//! `cor` across `S` shrinks the credit given to complementary candidates and
//! enlarges the penalty on redundant ones.
//!
//! Two routes are provided. [`select_reference`] recomputes every `cor`
//! against the full selected set at each iteration. [`select_fast`] keeps
//! per-candidate running sums of `cor` and `cor^2` and only evaluates the
//! pair with the most recently added feature, using
//! `Var = E[X^2] - E[X]^2` for the dispersion.

use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, mutual_information};
use crate::table::{DiscreteTable, Var};
use crate::trace::{argmax_lowest, CandidateScore, Method, SelectionStep, SelectionTrace};

/// `I(F;Fs) - I(F;Fs|C)`: positive for redundancy, negative for
/// complementariness.
pub fn pairwise_cor(table: &DiscreteTable, f: usize, f_s: usize) -> Result<f64> {
    if f == f_s {
        return Err(Error::input(format!("pairwise correlation of feature {f} with itself")));
    }
    let (a, b) = (Var::Feature(f), Var::Feature(f_s));
    Ok(mutual_information(table, a, b)? - conditional_mutual_information(table, a, b, Var::Class)?)
}

/// Population standard deviation (divisor `n`). Empty and singleton inputs
/// give 0.
pub fn dispersion_sigma(cor_values: &[f64]) -> f64 {
    if cor_values.len() < 2 {
        return 0.0;
    }
    let n = cor_values.len() as f64;
    let mean = cor_values.iter().sum::<f64>() / n;
    let ss: f64 = cor_values.iter().map(|c| (c - mean) * (c - mean)).sum();
    (ss / n).sqrt()
}

/// Dispersion coefficient. Zero `pair_cor` takes the `1 + sigma` branch;
/// no floor is applied, so `1 - sigma` may be negative.
pub fn phi(pair_cor: f64, sigma: f64) -> f64 {
    if pair_cor >= 0.0 {
        1.0 + sigma
    } else {
        1.0 - sigma
    }
}

pub fn score(relevance: f64, pair_cor: f64, sigma: f64) -> f64 {
    relevance - phi(pair_cor, sigma) * pair_cor
}

/// Running accumulators for one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateState {
    pub relevance: f64,
    /// Sum of `cor` over the selected set.
    pub pair_cor: f64,
    /// Sum of `cor^2` over the selected set.
    pub sum_cor_sq: f64,
}

impl CandidateState {
    pub fn new(relevance: f64) -> Self {
        Self {
            relevance,
            pair_cor: 0.0,
            sum_cor_sq: 0.0,
        }
    }

    pub fn add(&mut self, cor: f64) {
        self.pair_cor += cor;
        self.sum_cor_sq += cor * cor;
    }

    /// Dispersion from the accumulators for a selected set of size `n`.
    pub fn sigma(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let n = n as f64;
        ((self.sum_cor_sq - self.pair_cor * self.pair_cor / n) / n).max(0.0).sqrt()
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

pub(crate) fn relevances(table: &DiscreteTable) -> Result<Vec<f64>> {
    (0..table.n_features())
        .map(|f| mutual_information(table, Var::Feature(f), Var::Class))
        .collect()
}

fn step_from(c: &CandidateScore) -> SelectionStep {
    SelectionStep {
        feature: c.feature,
        score: c.score,
        relevance: Some(c.relevance),
        pair_cor: Some(c.pair_cor),
        sigma: Some(c.sigma),
        phi: Some(c.phi),
    }
}

fn candidate(feature: usize, relevance: f64, pair_cor: f64, sigma: f64) -> CandidateScore {
    CandidateScore {
        feature,
        relevance,
        pair_cor,
        sigma,
        phi: phi(pair_cor, sigma),
        score: score(relevance, pair_cor, sigma),
    }
}

fn pick(scored: &[CandidateScore]) -> CandidateScore {
    let pairs: Vec<(usize, f64)> = scored.iter().map(|c| (c.feature, c.score)).collect();
    let (f, _) = argmax_lowest(&pairs).expect("at least one candidate remains");
    scored.iter().find(|c| c.feature == f).cloned().expect("picked candidate is scored")
}

/// Reference selection: every iteration rescores each remaining candidate
/// against the whole selected set.
pub fn select_reference(table: &DiscreteTable, delta: usize) -> Result<SelectionTrace> {
    select_reference_with(table, delta, false)
}

pub fn select_reference_with(table: &DiscreteTable, delta: usize, verbose: bool) -> Result<SelectionTrace> {
    check_delta(table, delta)?;
    let relevance = relevances(table)?;
    let mut trace = SelectionTrace::new(Method::Rcdfs, delta);
    let mut remaining: Vec<usize> = (0..table.n_features()).collect();
    let mut history = Vec::new();

    while trace.selected.len() < delta {
        let mut scored = Vec::with_capacity(remaining.len());
        for &f in &remaining {
            let cors = trace
                .selected
                .iter()
                .map(|&s| pairwise_cor(table, f, s))
                .collect::<Result<Vec<_>>>()?;
            let pair_cor: f64 = cors.iter().sum();
            scored.push(candidate(f, relevance[f], pair_cor, dispersion_sigma(&cors)));
        }
        let best = pick(&scored);
        remaining.retain(|&f| f != best.feature);
        trace.push(step_from(&best));
        if verbose {
            history.push(scored);
        }
    }
    if verbose {
        trace.candidates = Some(history);
    }
    Ok(trace)
}

/// Incremental selection: one `cor` evaluation per candidate per iteration.
pub fn select_fast(table: &DiscreteTable, delta: usize) -> Result<SelectionTrace> {
    select_fast_with(table, delta, false)
}

pub fn select_fast_with(table: &DiscreteTable, delta: usize, verbose: bool) -> Result<SelectionTrace> {
    check_delta(table, delta)?;
    let mut states: Vec<CandidateState> = relevances(table)?.into_iter().map(CandidateState::new).collect();
    let mut trace = SelectionTrace::new(Method::Rcdfs, delta);
    let mut remaining: Vec<usize> = (0..table.n_features()).collect();
    let mut history = Vec::new();

    // First pick: empty selected set, so J is the relevance.
    let first: Vec<CandidateScore> = remaining
        .iter()
        .map(|&f| candidate(f, states[f].relevance, 0.0, 0.0))
        .collect();
    let mut newest = pick(&first);
    remaining.retain(|&f| f != newest.feature);
    trace.push(step_from(&newest));
    if verbose {
        history.push(first);
    }

    while trace.selected.len() < delta {
        let n = trace.selected.len();
        let mut scored = Vec::with_capacity(remaining.len());
        for &f in &remaining {
            let state = &mut states[f];
            state.add(pairwise_cor(table, f, newest.feature)?);
            scored.push(candidate(f, state.relevance, state.pair_cor, state.sigma(n)));
        }
        newest = pick(&scored);
        remaining.retain(|&f| f != newest.feature);
        trace.push(step_from(&newest));
        if verbose {
            history.push(scored);
        }
    }
    if verbose {
        trace.candidates = Some(history);
    }
    Ok(trace)
}
