//! Information-theoretic feature selection over discrete tables.
//!
//! The main selector is RCDFS, a greedy forward search whose penalty on a
//! candidate's pairwise correlation with the selected set is scaled by the
//! dispersion of those correlations. MIM, mRMR, CMIM, FCBF and ReliefF are
//! provided for comparison, together with an MDL discretizer, dataset
//! loaders and a cross-validation benchmark harness.

pub mod baselines;
pub mod bench;
pub mod classify;
pub mod discretize;
pub mod error;
pub mod info;
pub mod io;
pub mod rcdfs;
pub mod stats;
pub mod synth;
pub mod table;
pub mod trace;

pub use baselines::{run_method, MethodConfig};
pub use bench::{compare, curve, BenchmarkReport, CompareOptions, Curve, FoldPlan};
pub use classify::Classifier;
pub use discretize::{DiscretizationModel, FeatureCuts};
pub use error::{Error, Result};
pub use info::{conditional_mutual_information, entropy, mutual_information, symmetrical_uncertainty};
pub use io::{load_arff, load_csv, prepare, RawDataset};
pub use rcdfs::{select_fast, select_reference};
pub use table::{DiscreteTable, Var};
pub use trace::{Method, SelectionTrace};

/// Version string embedded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
