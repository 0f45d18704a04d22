//! Dataset loading (CSV, ARFF), export, and preparation into a
//! [`DiscreteTable`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretize::{apply, fit_cuts, DiscretizationModel, FeatureCuts};
use crate::error::{Error, Result};
use crate::table::DiscreteTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Nominal,
}

/// One column; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    /// `codes` index into `levels`.
    Nominal { levels: Vec<String>, codes: Vec<Option<u32>> },
}

impl Column {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Numeric(_) => ColumnKind::Numeric,
            Column::Nominal { .. } => ColumnKind::Nominal,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Nominal { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn missing(&self) -> usize {
        match self {
            Column::Numeric(v) => v.iter().filter(|x| x.is_none()).count(),
            Column::Nominal { codes, .. } => codes.iter().filter(|x| x.is_none()).count(),
        }
    }

    fn cell_text(&self, row: usize) -> Option<String> {
        match self {
            Column::Numeric(v) => v[row].map(|x| x.to_string()),
            Column::Nominal { levels, codes } => codes[row].map(|c| levels[c as usize].clone()),
        }
    }
}

/// A loaded table before coding. The class column is always nominal.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub names: Vec<String>,
    pub columns: Vec<Column>,
    pub class: usize,
}

impl RawDataset {
    pub fn new(names: Vec<String>, columns: Vec<Column>, class: usize) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::input("column names and columns differ in number"));
        }
        if columns.len() < 2 {
            return Err(Error::input("need a class column and at least one feature column"));
        }
        if class >= columns.len() {
            return Err(Error::input(format!("class column index {class} out of range")));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::input("dataset has no rows"));
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::input("columns differ in length"));
        }
        match &columns[class] {
            Column::Numeric(_) => return Err(Error::input("class column must be nominal")),
            Column::Nominal { codes, .. } => {
                if let Some(row) = codes.iter().position(Option::is_none) {
                    return Err(Error::input(format!("missing class value in row {}", row + 1)));
                }
            }
        }
        Ok(Self { names, columns, class })
    }

    /// Nominal view of a coded table: features `f0, f1, ...` then `class`,
    /// with levels `"0".."arity-1"` so codes are preserved.
    pub fn from_table(table: &DiscreteTable) -> Self {
        let nominal = |codes: &[u32], arity: u32| Column::Nominal {
            levels: (0..arity).map(|a| a.to_string()).collect(),
            codes: codes.iter().map(|&c| Some(c)).collect(),
        };
        let mut names: Vec<String> = (0..table.n_features()).map(|j| format!("f{j}")).collect();
        let mut columns: Vec<Column> = (0..table.n_features())
            .map(|j| nominal(table.feature(j), table.arities()[j]))
            .collect();
        names.push("class".into());
        columns.push(nominal(table.class(), table.class_arity()));
        let class = columns.len() - 1;
        Self { names, columns, class }
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    /// Column indices of the features, in file order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len()).filter(|&i| i != self.class).collect()
    }

    pub fn class_levels(&self) -> &[String] {
        match &self.columns[self.class] {
            Column::Nominal { levels, .. } => levels,
            Column::Numeric(_) => unreachable!("class column is nominal by construction"),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

/// Resolves a class designator: a column name, else a 0-based index. `None`
/// picks the last column.
fn resolve_class(names: &[String], designator: Option<&str>) -> Result<usize> {
    match designator {
        None => Ok(names.len() - 1),
        Some(d) => {
            if let Some(i) = names.iter().position(|n| n == d) {
                return Ok(i);
            }
            match d.parse::<usize>() {
                Ok(i) if i < names.len() => Ok(i),
                _ => Err(Error::input(format!("unknown class column '{d}'"))),
            }
        }
    }
}

/// Builds a nominal column with codes in first-appearance order.
fn nominal_first_appearance(cells: &[String]) -> Column {
    let mut levels: Vec<String> = Vec::new();
    let codes = cells
        .iter()
        .map(|c| {
            if is_missing(c) {
                return None;
            }
            Some(match levels.iter().position(|l| l == c) {
                Some(i) => i as u32,
                None => {
                    levels.push(c.clone());
                    levels.len() as u32 - 1
                }
            })
        })
        .collect();
    Column::Nominal { levels, codes }
}

/// A column is numeric when every present cell parses as a finite real and
/// at least one cell is present.
fn infer_column(cells: &[String]) -> Column {
    let parsed: Option<Vec<Option<f64>>> = cells
        .iter()
        .map(|c| {
            if is_missing(c) {
                Some(None)
            } else {
                c.parse::<f64>().ok().filter(|x| x.is_finite()).map(Some)
            }
        })
        .collect();
    match parsed {
        Some(values) if values.iter().any(Option::is_some) => Column::Numeric(values),
        _ => nominal_first_appearance(cells),
    }
}

pub fn load_csv(path: impl AsRef<Path>, class: Option<&str>) -> Result<RawDataset> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, class)
}

/// CSV with a header row. Cells are trimmed; `?` and empty cells are
/// missing.
pub fn parse_csv(text: &str, class: Option<&str>) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::input("empty file: no header row"));
    }
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(Error::input("file has a header but no data rows"));
    }
    let class_idx = resolve_class(&names, class)?;
    let columns = cells
        .iter()
        .enumerate()
        .map(|(i, c)| if i == class_idx { nominal_first_appearance(c) } else { infer_column(c) })
        .collect();
    RawDataset::new(names, columns, class_idx)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            line,
            message: format!("ragged row: expected {expected_len} fields, found {len}"),
        },
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

/// Writes CSV that [`load_csv`] reads back to an identical dataset.
pub fn write_csv(raw: &RawDataset) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&raw.names).map_err(csv_error)?;
    for row in 0..raw.n_rows() {
        let record: Vec<String> = raw
            .columns
            .iter()
            .map(|c| c.cell_text(row).unwrap_or_else(|| "?".to_string()))
            .collect();
        writer.write_record(&record).map_err(csv_error)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::input(e.to_string()))
}

// ARFF

/// Splits on unquoted commas, honouring single and double quotes and
/// backslash escapes inside quotes. Tokens are unquoted and trimmed.
fn split_arff(line: &str, lineno: usize) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut quoted_token = false;
    let mut chars = line.chars();
    while let Some(ch) = chars.next() {
        match quote {
            Some(q) => {
                if ch == '\\' {
                    if let Some(next) = chars.next() {
                        cur.push(next);
                    }
                } else if ch == q {
                    quote = None;
                } else {
                    cur.push(ch);
                }
            }
            None => match ch {
                '\'' | '"' if cur.trim().is_empty() => {
                    cur.clear();
                    quote = Some(ch);
                    quoted_token = true;
                }
                ',' => {
                    out.push(finish_token(&cur, quoted_token));
                    cur.clear();
                    quoted_token = false;
                }
                _ => cur.push(ch),
            },
        }
    }
    if quote.is_some() {
        return Err(Error::Parse {
            line: lineno,
            message: "unterminated quote".into(),
        });
    }
    out.push(finish_token(&cur, quoted_token));
    Ok(out)
}

fn finish_token(s: &str, quoted: bool) -> String {
    if quoted {
        s.to_string()
    } else {
        s.trim().to_string()
    }
}

/// Reads a possibly quoted leading word; returns it and the remainder.
fn leading_word(s: &str, lineno: usize) -> Result<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, q @ ('\'' | '"'))) => {
            let mut word = String::new();
            let mut escaped = false;
            for (i, ch) in chars {
                if escaped {
                    word.push(ch);
                    escaped = false;
                } else if ch == '\\' {
                    escaped = true;
                } else if ch == q {
                    return Ok((word, &s[i + 1..]));
                } else {
                    word.push(ch);
                }
            }
            Err(Error::Parse {
                line: lineno,
                message: "unterminated quoted name".into(),
            })
        }
        Some(_) => {
            let end = s.find(char::is_whitespace).unwrap_or(s.len());
            Ok((s[..end].to_string(), &s[end..]))
        }
        None => Err(Error::Parse {
            line: lineno,
            message: "missing name".into(),
        }),
    }
}

enum Declared {
    Numeric,
    Nominal(Vec<String>),
}

fn parse_attribute(rest: &str, lineno: usize) -> Result<(String, Declared)> {
    let (name, rest) = leading_word(rest, lineno)?;
    let ty = rest.trim();
    if let Some(body) = ty.strip_prefix('{') {
        let body = body.strip_suffix('}').ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("unterminated nominal declaration for '{name}'"),
        })?;
        let levels = if body.trim().is_empty() { Vec::new() } else { split_arff(body, lineno)? };
        if levels.iter().any(String::is_empty) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("empty nominal value in '{name}'"),
            });
        }
        return Ok((name, Declared::Nominal(levels)));
    }
    match ty.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok((name, Declared::Numeric)),
        "" => Err(Error::Parse {
            line: lineno,
            message: format!("attribute '{name}' has no type"),
        }),
        other => Err(Error::Unsupported(format!("ARFF attribute type '{other}' of '{name}'"))),
    }
}

pub fn load_arff(path: impl AsRef<Path>, class: Option<&str>) -> Result<RawDataset> {
    let text = fs::read_to_string(path)?;
    parse_arff(&text, class)
}

/// Dense ARFF. Nominal codes follow the declared value order. The class is
/// the last attribute unless `class` names another.
pub fn parse_arff(text: &str, class: Option<&str>) -> Result<RawDataset> {
    let mut names = Vec::new();
    let mut decls = Vec::new();
    let mut in_data = false;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            if line.starts_with('{') {
                return Err(Error::Unsupported("sparse ARFF data".into()));
            }
            rows.push((lineno, split_arff(line, lineno)?));
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        } else if lower.starts_with("@attribute") {
            let (name, decl) = parse_attribute(&line["@attribute".len()..], lineno)?;
            names.push(name);
            decls.push(decl);
        } else if lower.starts_with("@data") {
            in_data = true;
        } else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("unexpected header line '{line}'"),
            });
        }
    }
    if !in_data {
        return Err(Error::input("ARFF file has no @data section"));
    }
    if names.is_empty() {
        return Err(Error::input("ARFF file declares no attributes"));
    }
    if rows.is_empty() {
        return Err(Error::input("ARFF file has no data rows"));
    }
    let class_idx = resolve_class(&names, class)?;
    let mut columns: Vec<Column> = decls
        .iter()
        .map(|d| match d {
            Declared::Numeric => Column::Numeric(Vec::with_capacity(rows.len())),
            Declared::Nominal(levels) => Column::Nominal {
                levels: levels.clone(),
                codes: Vec::with_capacity(rows.len()),
            },
        })
        .collect();
    for (lineno, cells) in &rows {
        if cells.len() != names.len() {
            return Err(Error::Parse {
                line: *lineno,
                message: format!("ragged row: expected {} fields, found {}", names.len(), cells.len()),
            });
        }
        for ((col, cell), name) in columns.iter_mut().zip(cells).zip(&names) {
            let missing = cell == "?";
            match col {
                Column::Numeric(v) => v.push(if missing {
                    None
                } else {
                    Some(cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse {
                        line: *lineno,
                        message: format!("'{cell}' is not numeric in '{name}'"),
                    })?)
                }),
                Column::Nominal { levels, codes } => codes.push(if missing {
                    None
                } else {
                    Some(levels.iter().position(|l| l == cell).ok_or_else(|| Error::Parse {
                        line: *lineno,
                        message: format!("undeclared value '{cell}' in '{name}'"),
                    })? as u32)
                }),
            }
        }
    }
    if let Column::Numeric(_) = columns[class_idx] {
        return Err(Error::input(format!("class attribute '{}' must be nominal", names[class_idx])));
    }
    RawDataset::new(names, columns, class_idx)
}

fn arff_quote(s: &str) -> String {
    let plain = !s.is_empty()
        && s != "?"
        && !s.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'));
    if plain {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

/// Writes dense ARFF that [`load_arff`] reads back to an identical dataset
/// (given the same class designator).
pub fn write_arff(raw: &RawDataset, relation: &str) -> String {
    let mut out = format!("@relation {}\n\n", arff_quote(relation));
    for (name, col) in raw.names.iter().zip(&raw.columns) {
        let ty = match col {
            Column::Numeric(_) => "numeric".to_string(),
            Column::Nominal { levels, .. } => {
                format!("{{{}}}", levels.iter().map(|l| arff_quote(l)).collect::<Vec<_>>().join(","))
            }
        };
        out.push_str(&format!("@attribute {} {}\n", arff_quote(name), ty));
    }
    out.push_str("\n@data\n");
    for row in 0..raw.n_rows() {
        let cells: Vec<String> = raw
            .columns
            .iter()
            .map(|c| c.cell_text(row).map_or("?".to_string(), |t| arff_quote(&t)))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// How a feature column was coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    /// Nominal levels in load order.
    Nominal,
    /// MDL cut points (fitted or supplied).
    Discretized,
    /// One code per distinct value, ascending.
    DistinctValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProvenance {
    pub name: String,
    pub coding: Coding,
    pub arity: u32,
    pub missing: usize,
    /// Code given to missing cells, if any were missing.
    pub imputed_code: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub table: DiscreteTable,
    pub feature_names: Vec<String>,
    pub class_levels: Vec<String>,
    /// Cut points of the discretized numeric columns.
    pub model: DiscretizationModel,
    pub provenance: Vec<ColumnProvenance>,
}

/// Most frequent code among present cells; ties go to the lowest code.
fn modal_code(codes: &[Option<u32>], arity: u32) -> Option<u32> {
    let mut counts = vec![0usize; arity as usize];
    for c in codes.iter().flatten() {
        counts[*c as usize] += 1;
    }
    let mut best: Option<u32> = None;
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 && best.map_or(true, |b| n > counts[b as usize]) {
            best = Some(c as u32);
        }
    }
    best
}

/// Codes every feature column and the class.
///
/// Numeric columns are discretized with MDL cuts fitted on the present
/// values, or with the cuts of `model` when given. With `discretize` off,
/// numeric columns get one code per distinct value instead. Missing cells
/// take the column's modal code.
pub fn prepare(raw: &RawDataset, model: Option<&DiscretizationModel>, discretize: bool) -> Result<Prepared> {
    let labels: Vec<u32> = match &raw.columns[raw.class] {
        Column::Nominal { codes, .. } => codes.iter().map(|c| c.expect("class has no missing values")).collect(),
        Column::Numeric(_) => return Err(Error::input("class column must be nominal")),
    };
    let class_arity = raw.class_levels().len() as u32;

    let mut columns = Vec::new();
    let mut arities = Vec::new();
    let mut names = Vec::new();
    let mut provenance = Vec::new();
    let mut fitted = DiscretizationModel::default();
    for j in raw.feature_indices() {
        let name = &raw.names[j];
        let col = &raw.columns[j];
        if col.missing() == col.len() {
            return Err(Error::input(format!("column '{name}' has only missing values")));
        }
        let (codes, arity, coding): (Vec<Option<u32>>, u32, Coding) = match col {
            Column::Nominal { levels, codes } => (codes.clone(), levels.len() as u32, Coding::Nominal),
            Column::Numeric(values) if discretize => {
                let cuts = match model {
                    Some(m) => m
                        .get(name)
                        .ok_or_else(|| Error::input(format!("discretization model has no cuts for '{name}'")))?
                        .cuts
                        .clone(),
                    None => {
                        let (vals, labs): (Vec<f64>, Vec<u32>) = values
                            .iter()
                            .zip(&labels)
                            .filter_map(|(v, &l)| v.map(|v| (v, l)))
                            .unzip();
                        fit_cuts(&vals, &labs)?
                    }
                };
                let present: Vec<f64> = values.iter().flatten().copied().collect();
                let mut coded = apply(&cuts, &present)?.into_iter();
                let codes = values.iter().map(|v| v.and_then(|_| coded.next())).collect();
                let fc = FeatureCuts {
                    name: name.clone(),
                    cuts,
                };
                let arity = fc.arity();
                fitted.features.push(fc);
                (codes, arity, Coding::Discretized)
            }
            Column::Numeric(values) => {
                let mut distinct: Vec<f64> = values.iter().flatten().copied().collect();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                let codes = values
                    .iter()
                    .map(|v| v.map(|x| distinct.partition_point(|&d| d < x) as u32))
                    .collect();
                (codes, distinct.len() as u32, Coding::DistinctValues)
            }
        };
        let missing = col.missing();
        let modal = modal_code(&codes, arity).expect("column has a present value");
        let imputed_code = (missing > 0).then_some(modal);
        columns.push(codes.into_iter().map(|c| c.unwrap_or(modal)).collect());
        arities.push(arity);
        provenance.push(ColumnProvenance {
            name: name.clone(),
            coding,
            arity,
            missing,
            imputed_code,
        });
        names.push(name.clone());
    }
    let table = DiscreteTable::with_arities(columns, arities, labels, class_arity)?;
    Ok(Prepared {
        table,
        feature_names: names,
        class_levels: raw.class_levels().to_vec(),
        model: fitted,
        provenance,
    })
}
