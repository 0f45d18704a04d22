use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Selection methods available in the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rcdfs,
    Mim,
    Mrmr,
    Cmim,
    Fcbf,
    Relieff,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Rcdfs,
        Method::Cmim,
        Method::Mrmr,
        Method::Fcbf,
        Method::Mim,
        Method::Relieff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rcdfs => "RCDFS",
            Method::Mim => "MIM",
            Method::Mrmr => "mRMR",
            Method::Cmim => "CMIM",
            Method::Fcbf => "FCBF",
            Method::Relieff => "ReliefF",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rcdfs" => Ok(Method::Rcdfs),
            "mim" => Ok(Method::Mim),
            "mrmr" => Ok(Method::Mrmr),
            "cmim" => Ok(Method::Cmim),
            "fcbf" => Ok(Method::Fcbf),
            "relieff" => Ok(Method::Relieff),
            other => Err(Error::Input(format!("unknown method '{other}'"))),
        }
    }
}

/// Diagnostics recorded for the feature picked at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub feature: usize,
    /// Value of the method's criterion for the chosen feature (J, SU, weight...).
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relevance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair_cor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<f64>,
}

/// Score of one remaining candidate at one iteration (verbose traces only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub feature: usize,
    pub relevance: f64,
    pub pair_cor: f64,
    pub sigma: f64,
    pub phi: f64,
    pub score: f64,
}

/// Ordered output of a selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub method: Method,
    /// Requested number of features; for FCBF, the native output size.
    pub delta: usize,
    pub selected: Vec<usize>,
    pub steps: Vec<SelectionStep>,
    /// Per-iteration scores of every candidate, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub candidates: Option<Vec<Vec<CandidateScore>>>,
    /// Per-feature weights (ReliefF).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<Vec<f64>>,
    /// Seed used for randomised methods.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl SelectionTrace {
    pub(crate) fn new(method: Method, delta: usize) -> Self {
        Self {
            method,
            delta,
            selected: Vec::with_capacity(delta),
            steps: Vec::with_capacity(delta),
            candidates: None,
            weights: None,
            seed: None,
        }
    }

    pub(crate) fn push(&mut self, step: SelectionStep) {
        self.selected.push(step.feature);
        self.steps.push(step);
    }
}

/// Scores closer than this to the maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Lowest feature index among those whose score is within
/// [`TIE_TOLERANCE`] of the maximum. Independent of iteration order.
pub(crate) fn argmax_lowest(scores: &[(usize, f64)]) -> Option<(usize, f64)> {
    let max = scores.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .filter(|&&(_, s)| s >= max - TIE_TOLERANCE)
        .min_by_key(|&&(f, _)| f)
        .copied()
}
