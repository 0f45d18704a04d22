//! Integer-coded data table shared by every estimator, selector and classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selects a column of a [`DiscreteTable`]: one of the features or the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Feature(usize),
    Class,
}

/// Instances x features of non-negative integer codes, plus a class column.
///
/// Every code in column `j` lies in `[0, arities[j])`; all columns have
/// `n_rows` entries and `n_rows >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteTable {
    n_rows: usize,
    columns: Vec<Vec<u32>>,
    arities: Vec<u32>,
    class: Vec<u32>,
    class_arity: u32,
}

impl DiscreteTable {
    /// Builds a table, inferring each alphabet size as `max code + 1`.
    pub fn new(columns: Vec<Vec<u32>>, class: Vec<u32>) -> Result<Self> {
        let arities = columns.iter().map(|c| inferred_arity(c)).collect();
        let class_arity = inferred_arity(&class);
        Self::with_arities(columns, arities, class, class_arity)
    }

    /// Builds a table with declared alphabet sizes, which may exceed the
    /// largest observed code (unused levels are allowed).
    pub fn with_arities(
        columns: Vec<Vec<u32>>,
        arities: Vec<u32>,
        class: Vec<u32>,
        class_arity: u32,
    ) -> Result<Self> {
        let n_rows = class.len();
        if n_rows == 0 {
            return Err(Error::input("table must have at least one row"));
        }
        if arities.len() != columns.len() {
            return Err(Error::input(format!(
                "{} arities given for {} columns",
                arities.len(),
                columns.len()
            )));
        }
        for (j, (col, &arity)) in columns.iter().zip(&arities).enumerate() {
            if col.len() != n_rows {
                return Err(Error::input(format!(
                    "column {j} has {} rows, class column has {n_rows}",
                    col.len()
                )));
            }
            check_codes(col, arity, &format!("column {j}"))?;
        }
        check_codes(&class, class_arity, "class column")?;
        Ok(Self {
            n_rows,
            columns,
            arities,
            class,
            class_arity,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn class(&self) -> &[u32] {
        &self.class
    }

    pub fn class_arity(&self) -> u32 {
        self.class_arity
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    pub fn feature(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn column(&self, var: Var) -> Result<&[u32]> {
        match var {
            Var::Class => Ok(&self.class),
            Var::Feature(j) => self
                .columns
                .get(j)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::input(format!("feature index {j} out of range (table has {})", self.columns.len()))),
        }
    }

    pub fn arity(&self, var: Var) -> Result<u32> {
        match var {
            Var::Class => Ok(self.class_arity),
            Var::Feature(j) => self
                .arities
                .get(j)
                .copied()
                .ok_or_else(|| Error::input(format!("feature index {j} out of range (table has {})", self.columns.len()))),
        }
    }

    /// Row `i` as a vector of feature codes.
    pub fn row(&self, i: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// New table holding the given rows (in the given order). Arities are kept
    /// so codes stay comparable with the parent table.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("row subset is empty"));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows) {
            return Err(Error::input(format!("row index {bad} out of range")));
        }
        let pick = |col: &Vec<u32>| rows.iter().map(|&r| col[r]).collect::<Vec<_>>();
        Ok(Self {
            n_rows: rows.len(),
            columns: self.columns.iter().map(pick).collect(),
            arities: self.arities.clone(),
            class: pick(&self.class),
            class_arity: self.class_arity,
        })
    }

    /// New table restricted to the given feature columns (in order).
    pub fn select_features(&self, features: &[usize]) -> Result<Self> {
        if let Some(&bad) = features.iter().find(|&&f| f >= self.columns.len()) {
            return Err(Error::input(format!("feature index {bad} out of range")));
        }
        Ok(Self {
            n_rows: self.n_rows,
            columns: features.iter().map(|&f| self.columns[f].clone()).collect(),
            arities: features.iter().map(|&f| self.arities[f]).collect(),
            class: self.class.clone(),
            class_arity: self.class_arity,
        })
    }
}

fn inferred_arity(codes: &[u32]) -> u32 {
    codes.iter().copied().max().map_or(1, |m| m + 1)
}

fn check_codes(codes: &[u32], arity: u32, what: &str) -> Result<()> {
    if arity == 0 {
        return Err(Error::input(format!("{what} has zero arity")));
    }
    match codes.iter().find(|&&c| c >= arity) {
        Some(c) => Err(Error::input(format!("{what}: code {c} outside [0, {arity})"))),
        None => Ok(()),
    }
}
