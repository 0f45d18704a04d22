use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use rcdfs_core::bench::{default_curve_length, CompareOptions, SampleMode, MAX_FEATURES};
use rcdfs_core::io::{self, Prepared, RawDataset};
use rcdfs_core::rcdfs::select_fast_with;
use rcdfs_core::{synth, Classifier, DiscretizationModel, Error, FoldPlan, Method, MethodConfig, Result, VERSION};

#[derive(Parser)]
#[command(name = "rcdfs", version, about = "Information-theoretic feature selection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one selector on the whole dataset and emit its trace.
    Select(SelectArgs),
    /// Cross-validated error versus number of selected features.
    Curve(CurveArgs),
    /// Best-k comparison of several selectors with significance tests.
    Compare(CompareArgs),
    /// Fit MDL cut points for the numeric columns and emit the model.
    Discretize(DiscretizeArgs),
    /// Write a synthetic dataset with known structure.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Arff,
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the input file extension, else csv.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Class column by name or 0-based index; defaults to the last column.
    #[arg(long)]
    class: Option<String>,
    /// Code numeric columns by distinct value instead of MDL cut points.
    #[arg(long)]
    no_discretize: bool,
    /// Apply a saved discretization model instead of fitting one.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SelectorArgs {
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 5)]
    relieff_neighbors: usize,
    #[arg(long, default_value_t = 30)]
    relieff_sample: usize,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Falls back to RCDFS_SEED, then 0.
    #[arg(long, env = "RCDFS_SEED")]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "rcdfs")]
    method: Method,
    /// Defaults to min(50, floor(|F| / 2)).
    #[arg(long)]
    delta: Option<usize>,
    /// Record every candidate's score at every iteration (RCDFS only).
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    selector: SelectorArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Clone)]
struct CvArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "rcdfs")]
    method: Method,
    /// Defaults to min(50, floor(|F| / 2)).
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    cv: CvArgs,
    #[command(flatten)]
    selector: SelectorArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleArg {
    Repeat,
    Fold,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated list; defaults to all six methods.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    /// Largest k scanned; defaults to min(50, |F|).
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    cv: CvArgs,
    /// Granularity of the rank-sum samples.
    #[arg(long, value_enum, default_value = "repeat")]
    samples: SampleArg,
    /// Also write the plain-text tables to this file.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    selector: SelectorArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DiscretizeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SynthKind {
    /// Parity of two features plus binary noise.
    Xor,
    /// Feature, its exact copy, and a weaker independent feature.
    Duplicate,
    /// Three class-determining features, noisy copies and noise.
    Planted,
}

#[derive(Args)]
struct SynthArgs {
    kind: SynthKind,
    /// Defaults: 256 (xor), 16 (duplicate), 500 (planted).
    #[arg(long)]
    rows: Option<usize>,
    /// Total feature count (xor, planted). Defaults: 10 (xor), 30 (planted).
    #[arg(long)]
    features: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    common: CommonArgs,
}

/// Every field a run can be configured by; unused ones stay null.
#[derive(Serialize, Default)]
struct RunConfig {
    command: &'static str,
    input: Option<String>,
    format: Option<Format>,
    class: Option<String>,
    methods: Vec<Method>,
    delta: Option<usize>,
    m: Option<usize>,
    folds: Option<usize>,
    repeats: Option<usize>,
    seed: u64,
    gamma: Option<f64>,
    relieff_neighbors: Option<usize>,
    relieff_sample: Option<usize>,
    discretize: Option<bool>,
    model: Option<String>,
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<Value>,
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    fn with_data(command: &'static str, data: &DataArgs, common: &CommonArgs) -> Self {
        Self {
            command,
            input: Some(path_string(&data.input)),
            format: Some(resolve_format(data)),
            class: data.class.clone(),
            seed: common.seed.unwrap_or(0),
            discretize: Some(!data.no_discretize),
            model: data.model.as_deref().map(path_string),
            output: common.output.as_deref().map(path_string),
            ..Self::default()
        }
    }

    fn with_selector(mut self, s: &SelectorArgs) -> Self {
        self.gamma = Some(s.gamma);
        self.relieff_neighbors = Some(s.relieff_neighbors);
        self.relieff_sample = Some(s.relieff_sample);
        self
    }
}

fn resolve_format(data: &DataArgs) -> Format {
    data.format.unwrap_or_else(|| {
        match data.input.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("arff") => Format::Arff,
            _ => Format::Csv,
        }
    })
}

/// Accepts a bare model or the full output of `discretize`.
fn read_model(path: &Path) -> Result<DiscretizationModel> {
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let model = value.get("result").unwrap_or(&value);
    DiscretizationModel::from_json(&model.to_string())
}

fn load(data: &DataArgs) -> Result<Prepared> {
    let raw = match resolve_format(data) {
        Format::Csv => io::load_csv(&data.input, data.class.as_deref())?,
        Format::Arff => io::load_arff(&data.input, data.class.as_deref())?,
    };
    let model = match &data.model {
        Some(p) => Some(read_model(p)?),
        None => None,
    };
    io::prepare(&raw, model.as_ref(), !data.no_discretize)
}

fn dataset_summary(p: &Prepared) -> Value {
    json!({
        "rows": p.table.n_rows(),
        "features": p.table.n_features(),
        "feature_names": p.feature_names,
        "class_levels": p.class_levels,
        "provenance": p.provenance,
    })
}

fn method_config(method: Method, delta: usize, s: &SelectorArgs, seed: u64) -> MethodConfig {
    MethodConfig {
        method,
        delta,
        fcbf_gamma: s.gamma,
        relieff_neighbors: s.relieff_neighbors,
        relieff_sample: s.relieff_sample,
        seed,
    }
}

fn envelope(config: &RunConfig, dataset: Option<Value>, result: Value) -> Result<Value> {
    let mut v = json!({
        "tool": "rcdfs",
        "version": VERSION,
        "seed": config.seed,
        "config": serde_json::to_value(config)?,
    });
    if let Some(d) = dataset {
        v["dataset"] = d;
    }
    v["result"] = result;
    Ok(v)
}

fn emit(out: &mut dyn Write, text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(out: &mut dyn Write, value: &Value, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text, output)
}

fn run_select(a: SelectArgs, out: &mut dyn Write) -> Result<()> {
    let prepared = load(&a.data)?;
    let t = &prepared.table;
    let delta = a.delta.unwrap_or_else(|| default_curve_length(t.n_features()));
    let mut config = RunConfig::with_data("select", &a.data, &a.common).with_selector(&a.selector);
    config.methods = vec![a.method];
    config.delta = Some(delta);
    let mc = method_config(a.method, delta, &a.selector, config.seed);
    let trace = if a.verbose {
        if a.method != Method::Rcdfs {
            return Err(Error::input("--verbose is only available for rcdfs"));
        }
        select_fast_with(t, delta, true)?
    } else {
        rcdfs_core::run_method(t, &mc)?
    };
    let names: Vec<&str> = trace.selected.iter().map(|&f| prepared.feature_names[f].as_str()).collect();
    let result = json!({ "trace": trace, "selected_names": names });
    emit_json(out, &envelope(&config, Some(dataset_summary(&prepared)), result)?, a.common.output.as_deref())
}

fn run_curve(a: CurveArgs, out: &mut dyn Write) -> Result<()> {
    let prepared = load(&a.data)?;
    let t = &prepared.table;
    let m = a.m.unwrap_or_else(|| default_curve_length(t.n_features()));
    let mut config = RunConfig::with_data("curve", &a.data, &a.common).with_selector(&a.selector);
    config.methods = vec![a.method];
    config.m = Some(m);
    config.folds = Some(a.cv.folds);
    config.repeats = Some(a.cv.repeats);
    let plan = FoldPlan::stratified(t.class(), a.cv.folds, a.cv.repeats, config.seed)?;
    let mc = method_config(a.method, m, &a.selector, config.seed);
    let curve = rcdfs_core::curve(t, &mc, m, &plan, &Classifier::ALL)?;
    emit_json(
        out,
        &envelope(&config, Some(dataset_summary(&prepared)), serde_json::to_value(curve)?)?,
        a.common.output.as_deref(),
    )
}

fn run_compare(a: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let prepared = load(&a.data)?;
    let t = &prepared.table;
    let methods = if a.method.is_empty() { Method::ALL.to_vec() } else { a.method.clone() };
    let kmax = a.m.unwrap_or_else(|| MAX_FEATURES.min(t.n_features()));
    let sample_mode = match a.samples {
        SampleArg::Repeat => SampleMode::Repeat,
        SampleArg::Fold => SampleMode::Fold,
    };
    let mut config = RunConfig::with_data("compare", &a.data, &a.common).with_selector(&a.selector);
    config.methods = methods.clone();
    config.m = Some(kmax);
    config.folds = Some(a.cv.folds);
    config.repeats = Some(a.cv.repeats);
    config.extra = Some(json!({ "samples": sample_mode, "table": a.table.as_deref().map(path_string) }));
    if methods.len() < 2 {
        return Err(Error::input("compare needs at least two methods"));
    }
    let plan = FoldPlan::stratified(t.class(), a.cv.folds, a.cv.repeats, config.seed)?;
    let configs: Vec<MethodConfig> = methods
        .iter()
        .map(|&m| method_config(m, kmax, &a.selector, config.seed))
        .collect();
    let options = CompareOptions {
        kmax,
        classifiers: Classifier::ALL.to_vec(),
        sample_mode,
        alpha: 0.05,
    };
    let report = rcdfs_core::compare(t, &configs, &plan, &options)?;
    let text = report.to_text();
    let mut result = serde_json::to_value(&report)?;
    result["text"] = Value::String(text.clone());
    emit_json(out, &envelope(&config, Some(dataset_summary(&prepared)), result)?, a.common.output.as_deref())?;
    if let Some(p) = &a.table {
        fs::write(p, &text)?;
    } else if a.common.output.is_some() {
        out.write_all(text.as_bytes())?;
    }
    Ok(())
}

fn run_discretize(a: DiscretizeArgs, out: &mut dyn Write) -> Result<()> {
    if a.data.no_discretize {
        return Err(Error::input("--no-discretize makes no sense for discretize"));
    }
    let prepared = load(&a.data)?;
    let config = RunConfig::with_data("discretize", &a.data, &a.common);
    let model = match &a.data.model {
        // re-emit the supplied model rather than the empty fitted one
        Some(p) => read_model(p)?,
        None => prepared.model.clone(),
    };
    emit_json(
        out,
        &envelope(&config, Some(dataset_summary(&prepared)), serde_json::to_value(model)?)?,
        a.common.output.as_deref(),
    )
}

fn run_synth(a: SynthArgs, out: &mut dyn Write) -> Result<()> {
    let seed = a.common.seed.unwrap_or(0);
    let table = match a.kind {
        SynthKind::Xor => {
            let rows = a.rows.unwrap_or(256);
            let features = a.features.unwrap_or(10);
            if rows == 0 || rows % 4 != 0 {
                return Err(Error::input("xor needs a positive multiple of 4 rows"));
            }
            if features < 2 {
                return Err(Error::input("xor needs at least 2 features"));
            }
            synth::xor_with_noise(seed, features - 2, rows)
        }
        SynthKind::Duplicate => {
            if a.features.is_some() {
                return Err(Error::input("duplicate has a fixed 3 features"));
            }
            let rows = a.rows.unwrap_or(16);
            if rows == 0 || rows % 4 != 0 {
                return Err(Error::input("duplicate needs a positive multiple of 4 rows"));
            }
            synth::duplicate_table(rows / 4)
        }
        SynthKind::Planted => {
            let rows = a.rows.unwrap_or(500);
            let features = a.features.unwrap_or(30);
            if rows == 0 || features < 6 {
                return Err(Error::input("planted needs rows >= 1 and at least 6 features"));
            }
            synth::planted(seed, rows, features)
        }
    };
    let raw = RawDataset::from_table(&table);
    let text = match a.format {
        Format::Csv => io::write_csv(&raw)?,
        Format::Arff => io::write_arff(&raw, &format!("{}-{seed}", a.kind.to_possible_value().map_or("synth".into(), |v| v.get_name().to_string()))),
    };
    emit(out, &text, a.common.output.as_deref())?;
    if a.common.output.is_some() {
        let config = RunConfig {
            command: "synth",
            format: Some(a.format),
            seed,
            output: a.common.output.as_deref().map(path_string),
            extra: Some(json!({ "kind": a.kind, "rows": table.n_rows(), "features": table.n_features() })),
            ..RunConfig::default()
        };
        emit_json(out, &envelope(&config, None, json!({ "written": true }))?, None)?;
    }
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Select(a) => run_select(a, out),
        Command::Curve(a) => run_curve(a, out),
        Command::Compare(a) => run_compare(a, out),
        Command::Discretize(a) => run_discretize(a, out),
        Command::Synth(a) => run_synth(a, out),
    }
}

fn report_error(err: &mut dyn Write, kind: &str, message: &str) {
    let v = json!({
        "tool": "rcdfs",
        "version": VERSION,
        "error": { "kind": kind, "message": message },
    });
    let _ = writeln!(err, "{v}");
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and error objects to `err`. Returns the process exit code:
/// 0 on success, 1 for runtime failures, 2 for usage errors.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{}", e.render());
            return 0;
        }
        Err(e) => {
            report_error(err, "usage", e.to_string().trim_end());
            return 2;
        }
    };
    let code = match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            report_error(err, e.kind(), &e.to_string());
            1
        }
    };
    let _ = out.flush();
    code
}
