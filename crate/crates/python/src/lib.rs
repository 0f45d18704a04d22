use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use rcdfs_core as core;
use rcdfs_core::bench::{CompareOptions, MAX_FEATURES};
use rcdfs_core::{Classifier, FoldPlan, Method, MethodConfig, Var};

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn var(index: Option<usize>) -> Var {
    index.map_or(Var::Class, Var::Feature)
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(to_py)
}

/// Integer-coded feature columns plus a class column.
#[pyclass(name = "DiscreteTable", frozen)]
struct PyTable {
    inner: core::DiscreteTable,
    names: Vec<String>,
}

#[pymethods]
impl PyTable {
    #[new]
    #[pyo3(signature = (columns, labels, names=None))]
    fn new(columns: Vec<Vec<u32>>, labels: Vec<u32>, names: Option<Vec<String>>) -> PyResult<Self> {
        let inner = core::DiscreteTable::new(columns, labels).map_err(to_py)?;
        let names = names.unwrap_or_else(|| (0..inner.n_features()).map(|j| format!("f{j}")).collect());
        if names.len() != inner.n_features() {
            return Err(PyValueError::new_err("one name per feature column is required"));
        }
        Ok(Self { inner, names })
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn arities(&self) -> Vec<u32> {
        self.inner.arities().to_vec()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn feature(&self, j: usize) -> PyResult<Vec<u32>> {
        self.inner.column(Var::Feature(j)).map(<[u32]>::to_vec).map_err(to_py)
    }

    #[getter]
    fn labels(&self) -> Vec<u32> {
        self.inner.class().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("DiscreteTable(rows={}, features={})", self.inner.n_rows(), self.inner.n_features())
    }
}

/// Ordered output of a selector.
#[pyclass(name = "SelectionTrace", frozen)]
struct PyTrace {
    inner: core::SelectionTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    #[getter]
    fn selected(&self) -> Vec<usize> {
        self.inner.selected.clone()
    }

    #[getter]
    fn scores(&self) -> Vec<f64> {
        self.inner.steps.iter().map(|s| s.score).collect()
    }

    #[getter]
    fn weights(&self) -> Option<Vec<f64>> {
        self.inner.weights.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.selected.len()
    }

    fn __repr__(&self) -> String {
        format!("SelectionTrace(method={}, selected={:?})", self.inner.method.name(), self.inner.selected)
    }
}

/// `I(X;Y)` in bits; `None` stands for the class column.
#[pyfunction]
#[pyo3(signature = (table, x, y=None))]
fn mutual_information(table: &PyTable, x: Option<usize>, y: Option<usize>) -> PyResult<f64> {
    core::mutual_information(&table.inner, var(x), var(y)).map_err(to_py)
}

/// `I(X;Y|Z)` in bits; `None` stands for the class column.
#[pyfunction]
fn conditional_mutual_information(table: &PyTable, x: Option<usize>, y: Option<usize>, z: Option<usize>) -> PyResult<f64> {
    core::conditional_mutual_information(&table.inner, var(x), var(y), var(z)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (table, x, y=None))]
fn symmetrical_uncertainty(table: &PyTable, x: Option<usize>, y: Option<usize>) -> PyResult<f64> {
    core::symmetrical_uncertainty(&table.inner, var(x), var(y)).map_err(to_py)
}

#[pyfunction]
fn pairwise_cor(table: &PyTable, f: usize, f_s: usize) -> PyResult<f64> {
    core::rcdfs::pairwise_cor(&table.inner, f, f_s).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (table, method="rcdfs", delta=None, gamma=0.0, relieff_neighbors=5, relieff_sample=30, seed=0))]
fn select(
    table: &PyTable,
    method: &str,
    delta: Option<usize>,
    gamma: f64,
    relieff_neighbors: usize,
    relieff_sample: usize,
    seed: u64,
) -> PyResult<PyTrace> {
    let t = &table.inner;
    let config = MethodConfig {
        method: self::method(method)?,
        delta: delta.unwrap_or_else(|| core::bench::default_curve_length(t.n_features())),
        fcbf_gamma: gamma,
        relieff_neighbors,
        relieff_sample,
        seed,
    };
    core::run_method(t, &config).map(|inner| PyTrace { inner }).map_err(to_py)
}

/// RCDFS recomputing every pairwise term at every iteration.
#[pyfunction]
fn select_reference(table: &PyTable, delta: usize) -> PyResult<PyTrace> {
    core::select_reference(&table.inner, delta).map(|inner| PyTrace { inner }).map_err(to_py)
}

#[pyfunction]
fn fit_cuts(values: Vec<f64>, labels: Vec<u32>) -> PyResult<Vec<f64>> {
    core::discretize::fit_cuts(&values, &labels).map_err(to_py)
}

#[pyfunction]
fn apply_cuts(cuts: Vec<f64>, values: Vec<f64>) -> PyResult<Vec<u32>> {
    core::discretize::apply(&cuts, &values).map_err(to_py)
}

/// Returns `(rank_sum, two_sided_p)`.
#[pyfunction]
fn wilcoxon_rank_sum(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = core::stats::wilcoxon_rank_sum(&a, &b).map_err(to_py)?;
    Ok((r.statistic, r.p_value))
}

/// `errors[method][block]`; returns `(chi2, p)`.
#[pyfunction]
fn friedman_test(errors: Vec<Vec<f64>>) -> PyResult<(f64, f64)> {
    let r = core::stats::friedman_test(&errors).map_err(to_py)?;
    Ok((r.statistic, r.p_value))
}

/// Loads CSV or ARFF and codes it; numeric columns are MDL-discretized
/// unless `discretize` is false.
#[pyfunction]
#[pyo3(signature = (path, class_column=None, arff=false, discretize=true))]
fn load(path: &str, class_column: Option<&str>, arff: bool, discretize: bool) -> PyResult<PyTable> {
    let raw = if arff {
        core::load_arff(path, class_column)
    } else {
        core::load_csv(path, class_column)
    }
    .map_err(to_py)?;
    let p = core::prepare(&raw, None, discretize).map_err(to_py)?;
    Ok(PyTable {
        inner: p.table,
        names: p.feature_names,
    })
}

/// Mean CV error for k = 1..m selected features.
#[pyfunction]
#[pyo3(signature = (table, method="rcdfs", m=None, folds=10, repeats=10, seed=0))]
fn curve(table: &PyTable, method: &str, m: Option<usize>, folds: usize, repeats: usize, seed: u64) -> PyResult<Vec<f64>> {
    let t = &table.inner;
    let m = m.unwrap_or_else(|| core::bench::default_curve_length(t.n_features()));
    let plan = FoldPlan::stratified(t.class(), folds, repeats, seed).map_err(to_py)?;
    let mut config = MethodConfig::new(self::method(method)?, m);
    config.seed = seed;
    core::curve(t, &config, m, &plan, &Classifier::ALL)
        .map(|c| c.errors)
        .map_err(to_py)
}

/// Benchmark report as a JSON string.
#[pyfunction]
#[pyo3(signature = (table, methods, folds=10, repeats=10, seed=0))]
fn compare(table: &PyTable, methods: Vec<String>, folds: usize, repeats: usize, seed: u64) -> PyResult<String> {
    let t = &table.inner;
    let plan = FoldPlan::stratified(t.class(), folds, repeats, seed).map_err(to_py)?;
    let kmax = MAX_FEATURES.min(t.n_features());
    let configs = methods
        .iter()
        .map(|m| {
            let mut c = MethodConfig::new(method(m)?, kmax);
            c.seed = seed;
            Ok(c)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let report = core::compare(t, &configs, &plan, &CompareOptions::for_table(t)).map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn wrap(inner: core::DiscreteTable) -> PyTable {
    let names = (0..inner.n_features()).map(|j| format!("f{j}")).collect();
    PyTable { inner, names }
}

/// Parity pair at features 0 and 1 plus binary noise.
#[pyfunction]
#[pyo3(signature = (seed=0, n_noise=8, rows=256))]
fn synth_xor(seed: u64, n_noise: usize, rows: usize) -> PyResult<PyTable> {
    if rows == 0 || rows % 4 != 0 {
        return Err(PyValueError::new_err("rows must be a positive multiple of 4"));
    }
    Ok(wrap(core::synth::xor_with_noise(seed, n_noise, rows)))
}

/// Feature 1 duplicates feature 0; feature 2 is weaker and independent.
#[pyfunction]
#[pyo3(signature = (copies=4))]
fn synth_duplicate(copies: usize) -> PyTable {
    wrap(core::synth::duplicate_table(copies.max(1)))
}

#[pyfunction]
#[pyo3(signature = (seed=0, rows=500, features=30))]
fn synth_planted(seed: u64, rows: usize, features: usize) -> PyResult<PyTable> {
    if features < 6 {
        return Err(PyValueError::new_err("planted tables need at least 6 features"));
    }
    Ok(wrap(core::synth::planted(seed, rows, features)))
}

#[pymodule]
fn rcdfs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(symmetrical_uncertainty, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_cor, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(select_reference, m)?)?;
    m.add_function(wrap_pyfunction!(fit_cuts, m)?)?;
    m.add_function(wrap_pyfunction!(apply_cuts, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_rank_sum, m)?)?;
    m.add_function(wrap_pyfunction!(friedman_test, m)?)?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(curve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(synth_xor, m)?)?;
    m.add_function(wrap_pyfunction!(synth_duplicate, m)?)?;
    m.add_function(wrap_pyfunction!(synth_planted, m)?)?;
    Ok(())
}
