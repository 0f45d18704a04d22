//! Cross-validated benchmarking of selectors: error-vs-k curves, best-k
//! comparison with Wilcoxon rank-sum tests against a reference method, and
//! Friedman tests over k-ranges.
//!
//! Selection always runs inside each fold on the training rows only; the
//! test rows of a fold are never passed to a selector.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_method, MethodConfig};
use crate::classify::{prefix_errors, Classifier};
use crate::error::{Error, Result};
use crate::stats::{friedman_test, wilcoxon_rank_sum, RankSumResult};
use crate::table::DiscreteTable;
use crate::trace::Method;

/// Upper bound on the number of selected features examined.
pub const MAX_FEATURES: usize = 50;

/// Default curve length: `min(50, floor(|F| / 2))`, at least 1.
pub fn default_curve_length(n_features: usize) -> usize {
    MAX_FEATURES.min(n_features / 2).max(1)
}

/// Stratified, repeated k-fold assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_rows: usize,
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
    /// `assignments[repeat][row]` is the test fold of `row` in that repeat.
    #[serde(skip)]
    assignments: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Per repeat, the rows of each class are shuffled, the classes are
    /// concatenated in code order and rows are dealt to folds round-robin.
    /// Fold sizes therefore differ by at most one and class proportions are
    /// preserved.
    pub fn stratified(class: &[u32], n_folds: usize, n_repeats: usize, seed: u64) -> Result<Self> {
        let n_rows = class.len();
        if n_folds < 2 {
            return Err(Error::input("need at least two folds"));
        }
        if n_repeats == 0 {
            return Err(Error::input("need at least one repeat"));
        }
        if n_rows < n_folds {
            return Err(Error::input(format!("{n_rows} rows cannot fill {n_folds} folds")));
        }
        let n_classes = class.iter().copied().max().unwrap_or(0) as usize + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignments = Vec::with_capacity(n_repeats);
        for _ in 0..n_repeats {
            let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
            for (i, &c) in class.iter().enumerate() {
                by_class[c as usize].push(i);
            }
            let mut fold_of = vec![0usize; n_rows];
            let mut pos = 0;
            for rows in &mut by_class {
                rows.shuffle(&mut rng);
                for &r in rows.iter() {
                    fold_of[r] = pos % n_folds;
                    pos += 1;
                }
            }
            assignments.push(fold_of);
        }
        Ok(Self {
            n_rows,
            n_folds,
            n_repeats,
            seed,
            assignments,
        })
    }

    pub fn fold_of(&self, repeat: usize, row: usize) -> usize {
        self.assignments[repeat][row]
    }

    /// (training rows, test rows) of one fold, both ascending.
    pub fn split(&self, repeat: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.n_rows).partition(|&r| self.assignments[repeat][r] != fold)
    }
}

/// Checks that a fold split is a partition of the rows with disjoint parts
/// and that the selector saw exactly the training rows.
fn leakage_guard(n_rows: usize, train: &[usize], test: &[usize], selector_rows: usize) -> Result<()> {
    let mut seen = vec![false; n_rows];
    for &r in train {
        seen[r] = true;
    }
    if test.iter().any(|&r| seen[r]) {
        return Err(Error::input("fold split leaks test rows into training rows"));
    }
    if train.len() + test.len() != n_rows || selector_rows != train.len() {
        return Err(Error::input("selector input does not match the training split"));
    }
    Ok(())
}

/// Error rates of one (repeat, fold) unit for the top-k prefixes of the
/// selector's ranking, per classifier.
#[derive(Debug, Clone)]
struct UnitResult {
    /// `rates[classifier][k - 1]`
    rates: Vec<Vec<f64>>,
    native_len: usize,
}

fn run_unit(
    table: &DiscreteTable,
    config: &MethodConfig,
    plan: &FoldPlan,
    repeat: usize,
    fold: usize,
    m: usize,
    classifiers: &[Classifier],
) -> Result<UnitResult> {
    let (train_rows, test_rows) = plan.split(repeat, fold);
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::input("empty fold"));
    }
    let train = table.subset_rows(&train_rows)?;
    let test = table.subset_rows(&test_rows)?;
    leakage_guard(table.n_rows(), &train_rows, &test_rows, train.n_rows())?;

    let mut cfg = config.clone();
    cfg.delta = m.min(table.n_features());
    let trace = run_method(&train, &cfg)?;
    let native_len = trace.selected.len();
    let ranked = &trace.selected[..native_len.min(m)];
    let rates = classifiers
        .iter()
        .map(|&c| {
            prefix_errors(c, &train, &test, ranked)
                .map(|errs| errs.iter().map(|&e| e as f64 / test.n_rows() as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(UnitResult { rates, native_len })
}

/// Runs every (repeat, fold) unit of `plan` for one method. Units run in
/// parallel; results come back in (repeat, fold) order.
fn run_units(
    table: &DiscreteTable,
    config: &MethodConfig,
    plan: &FoldPlan,
    m: usize,
    classifiers: &[Classifier],
) -> Result<Vec<Vec<UnitResult>>> {
    if plan.n_rows != table.n_rows() {
        return Err(Error::input("fold plan was built for a different number of rows"));
    }
    let units: Vec<(usize, usize)> = (0..plan.n_repeats)
        .flat_map(|r| (0..plan.n_folds).map(move |f| (r, f)))
        .collect();
    let flat = units
        .par_iter()
        .map(|&(r, f)| run_unit(table, config, plan, r, f, m, classifiers))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(plan.n_repeats);
    let mut it = flat.into_iter();
    for _ in 0..plan.n_repeats {
        out.push(it.by_ref().take(plan.n_folds).collect());
    }
    Ok(out)
}

/// Mean error over classifiers of one unit at top-`k` (1-based).
fn unit_error(unit: &UnitResult, k: usize) -> f64 {
    unit.rates.iter().map(|r| r[k - 1]).sum::<f64>() / unit.rates.len() as f64
}

/// Mean test error versus number of selected features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub method: Method,
    /// Requested length.
    pub m: usize,
    /// `errors[k - 1]`: mean over folds, repeats and classifiers.
    pub errors: Vec<f64>,
    /// Same, per classifier.
    pub per_classifier: Vec<ClassifierCurve>,
    /// Set when the selector returned fewer than `m` features in some fold.
    pub truncated: bool,
    /// Smallest selector output size over the folds.
    pub native_len: usize,
    pub leakage_guard_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierCurve {
    pub classifier: Classifier,
    pub errors: Vec<f64>,
}

fn min_len(units: &[Vec<UnitResult>], m: usize) -> usize {
    units
        .iter()
        .flatten()
        .map(|u| u.native_len.min(m))
        .min()
        .unwrap_or(0)
}

/// Error curve for k = 1..m under `plan`.
pub fn curve(table: &DiscreteTable, config: &MethodConfig, m: usize, plan: &FoldPlan, classifiers: &[Classifier]) -> Result<Curve> {
    if m == 0 {
        return Err(Error::input("curve length must be at least 1"));
    }
    if classifiers.is_empty() {
        return Err(Error::input("need at least one classifier"));
    }
    let units = run_units(table, config, plan, m, classifiers)?;
    let len = min_len(&units, m);
    let count = (plan.n_repeats * plan.n_folds) as f64;
    let errors = (1..=len)
        .map(|k| units.iter().flatten().map(|u| unit_error(u, k)).sum::<f64>() / count)
        .collect();
    let per_classifier = classifiers
        .iter()
        .enumerate()
        .map(|(ci, &c)| ClassifierCurve {
            classifier: c,
            errors: (1..=len)
                .map(|k| units.iter().flatten().map(|u| u.rates[ci][k - 1]).sum::<f64>() / count)
                .collect(),
        })
        .collect();
    Ok(Curve {
        method: config.method,
        m,
        errors,
        per_classifier,
        truncated: len < m,
        native_len: units.iter().flatten().map(|u| u.native_len).min().unwrap_or(0),
        leakage_guard_passed: true,
    })
}

/// Granularity of the samples fed to the rank-sum test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// One sample per repeat (mean over its folds).
    Repeat,
    /// One sample per fold.
    Fold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub kmax: usize,
    pub classifiers: Vec<Classifier>,
    pub sample_mode: SampleMode,
    pub alpha: f64,
}

impl CompareOptions {
    pub fn for_table(table: &DiscreteTable) -> Self {
        Self {
            kmax: MAX_FEATURES.min(table.n_features()),
            classifiers: Classifier::ALL.to_vec(),
            sample_mode: SampleMode::Repeat,
            alpha: 0.05,
        }
    }
}

/// Significance marker relative to the reference method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marker {
    /// Significantly higher error than the reference.
    Degradation,
    /// Significantly lower error than the reference.
    Improvement,
}

impl Marker {
    pub fn symbol(self) -> &'static str {
        match self {
            Marker::Degradation => "∘",
            Marker::Improvement => "•",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub config: MethodConfig,
    pub curve: Vec<f64>,
    pub truncated: bool,
    pub native_len: usize,
    pub best_k: usize,
    /// Mean error at `best_k`.
    pub mean_error: f64,
    pub samples: Vec<f64>,
    pub wilcoxon: Option<RankSumResult>,
    pub marker: Option<Marker>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanRow {
    /// Errors are averaged over 1..=k selected features.
    pub k: usize,
    pub methods: Vec<Method>,
    pub mean_errors: Vec<f64>,
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub n_rows: usize,
    pub n_features: usize,
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
    pub options: CompareOptions,
    pub reference: Method,
    pub methods: Vec<MethodReport>,
    pub friedman: Vec<FriedmanRow>,
    pub leakage_guard_passed: bool,
}

/// Index of the smallest value; ties go to the earliest.
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.map_or(true, |b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

/// k-range end points 5, 10, ..., capped at `kmax`.
fn k_ranges(kmax: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..=MAX_FEATURES / 5).map(|i| i * 5).filter(|&k| k <= kmax).collect();
    if ks.is_empty() {
        ks.push(kmax);
    }
    ks
}

/// Compares methods under `plan`. The first RCDFS entry (or the first
/// method when RCDFS is absent) is the reference for the rank-sum tests.
pub fn compare(table: &DiscreteTable, methods: &[MethodConfig], plan: &FoldPlan, options: &CompareOptions) -> Result<BenchmarkReport> {
    if methods.len() < 2 {
        return Err(Error::input("compare needs at least two methods"));
    }
    if options.kmax == 0 || options.classifiers.is_empty() {
        return Err(Error::input("compare needs kmax >= 1 and at least one classifier"));
    }
    let kmax = options.kmax.min(table.n_features());
    let reference_idx = methods.iter().position(|c| c.method == Method::Rcdfs).unwrap_or(0);

    let all_units = methods
        .iter()
        .map(|cfg| run_units(table, cfg, plan, kmax, &options.classifiers))
        .collect::<Result<Vec<_>>>()?;

    let count = (plan.n_repeats * plan.n_folds) as f64;
    // repeat-level error at k: mean over the repeat's folds
    let repeat_error = |units: &[Vec<UnitResult>], r: usize, k: usize| {
        units[r].iter().map(|u| unit_error(u, k)).sum::<f64>() / plan.n_folds as f64
    };

    let mut reports = Vec::with_capacity(methods.len());
    for (cfg, units) in methods.iter().zip(&all_units) {
        let len = min_len(units, kmax);
        let curve: Vec<f64> = (1..=len)
            .map(|k| units.iter().flatten().map(|u| unit_error(u, k)).sum::<f64>() / count)
            .collect();
        let (best_k, mean_error, samples) = match argmin(&curve) {
            Some(i) => {
                let k = i + 1;
                let samples = match options.sample_mode {
                    SampleMode::Repeat => (0..plan.n_repeats).map(|r| repeat_error(units, r, k)).collect(),
                    SampleMode::Fold => units.iter().flatten().map(|u| unit_error(u, k)).collect(),
                };
                (k, curve[i], samples)
            }
            None => (0, f64::NAN, Vec::new()),
        };
        reports.push(MethodReport {
            config: cfg.clone(),
            curve,
            truncated: len < kmax,
            native_len: units.iter().flatten().map(|u| u.native_len).min().unwrap_or(0),
            best_k,
            mean_error,
            samples,
            wilcoxon: None,
            marker: None,
        });
    }

    let reference_samples = reports[reference_idx].samples.clone();
    let reference_error = reports[reference_idx].mean_error;
    for rep in &mut reports {
        if rep.samples.is_empty() || reference_samples.is_empty() {
            continue;
        }
        let test = wilcoxon_rank_sum(&rep.samples, &reference_samples)?;
        if test.p_value < options.alpha {
            rep.marker = Some(if rep.mean_error > reference_error {
                Marker::Degradation
            } else {
                Marker::Improvement
            });
        }
        rep.wilcoxon = Some(test);
    }

    let mut friedman = Vec::new();
    if plan.n_repeats >= 2 {
        for k in k_ranges(kmax) {
            let mut names = Vec::new();
            let mut matrix = Vec::new();
            for (cfg, (units, rep)) in methods.iter().zip(all_units.iter().zip(&reports)) {
                let upto = k.min(rep.curve.len());
                if upto == 0 {
                    continue;
                }
                names.push(cfg.method);
                matrix.push(
                    (0..plan.n_repeats)
                        .map(|r| (1..=upto).map(|kk| repeat_error(units, r, kk)).sum::<f64>() / upto as f64)
                        .collect::<Vec<f64>>(),
                );
            }
            if matrix.len() < 2 {
                continue;
            }
            let result = friedman_test(&matrix)?;
            friedman.push(FriedmanRow {
                k,
                methods: names,
                mean_errors: matrix.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect(),
                statistic: result.statistic,
                p_value: result.p_value,
                significant: result.p_value < options.alpha,
            });
        }
    }

    Ok(BenchmarkReport {
        n_rows: table.n_rows(),
        n_features: table.n_features(),
        n_folds: plan.n_folds,
        n_repeats: plan.n_repeats,
        seed: plan.seed,
        options: CompareOptions {
            kmax,
            ..options.clone()
        },
        reference: methods[reference_idx].method,
        methods: reports,
        friedman,
        leakage_guard_passed: true,
    })
}

impl BenchmarkReport {
    /// Plain-text rendering: a best-k table (Err in percent, rank-sum
    /// p-value, marker) followed by the Friedman k-range table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Best-k error over {}x{}-fold CV ({} rows, {} features, seed {})",
            self.n_repeats, self.n_folds, self.n_rows, self.n_features, self.seed
        );
        let _ = writeln!(out, "{:<10} {:>6} {:>8} {:>8}  ", "Method", "k", "Err", "p-val");
        for m in &self.methods {
            let p = m.wilcoxon.as_ref().map_or("-".to_string(), |w| format!("{:.3}", w.p_value));
            let mark = m.marker.map_or("", Marker::symbol);
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>8.2} {:>8} {}",
                m.config.method.name(),
                m.best_k,
                m.mean_error * 100.0,
                p,
                mark
            );
        }
        let _ = writeln!(out, "∘ / • significantly higher / lower error than {} at {}", self.reference, self.options.alpha);
        if self.friedman.is_empty() {
            return out;
        }
        let _ = writeln!(out);
        let _ = write!(out, "{:<10}", "Friedman");
        for row in &self.friedman {
            let _ = write!(out, " {:>8}", format!("k={}", row.k));
        }
        let _ = writeln!(out);
        for m in &self.methods {
            let _ = write!(out, "{:<10}", m.config.method.name());
            for row in &self.friedman {
                let cell = row
                    .methods
                    .iter()
                    .position(|&x| x == m.config.method)
                    .map_or("-".to_string(), |i| format!("{:.2}", row.mean_errors[i] * 100.0));
                let _ = write!(out, " {cell:>8}");
            }
            let _ = writeln!(out);
        }
        let _ = write!(out, "{:<10}", "p-val");
        for row in &self.friedman {
            let _ = write!(out, " {:>8.3}", row.p_value);
        }
        let _ = writeln!(out);
        let _ = write!(out, "{:<10}", "");
        for row in &self.friedman {
            let _ = write!(out, " {:>8}", if row.significant { "S" } else { "N" });
        }
        let _ = writeln!(out);
        out
    }
}
