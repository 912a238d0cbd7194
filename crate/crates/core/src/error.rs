use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("label column `{column}` is not binary: {detail}")]
    NonBinaryLabel { column: String, detail: String },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("group `{0}` is empty")]
    EmptyGroup(String),

    #[error("empty conditioning cell: {0}")]
    EmptyCell(String),

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("no feature has |correlation| below {threshold}; raise the threshold")]
    NoFairFeatures { threshold: f64 },

    #[error("split left {0} absent from the training set; choose a different seed")]
    DegenerateSplit(String),

    #[error("target DP {target} unreachable within {cap} appended rows")]
    Unreachable { target: f64, cap: usize },

    #[error("non-finite loss at step {step}")]
    Divergence { step: usize },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("{0} features exceed the exact enumeration limit of 15")]
    TooManyFeatures(usize),

    #[error("every feature is unfair; nothing left to retrain on")]
    AllFeaturesUnfair,

    #[error("{group} group has {available} rows but {required} are needed")]
    GroupTooSmall { group: &'static str, available: usize, required: usize },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Dataset(_) => "dataset",
            Error::NonBinaryLabel { .. } => "non_binary_label",
            Error::UnknownColumn(_) => "unknown_column",
            Error::Config(_) => "config",
            Error::Shape { .. } => "shape",
            Error::EmptyGroup(_) => "empty_group",
            Error::EmptyCell(_) => "empty_cell",
            Error::ZeroVariance(_) => "zero_variance",
            Error::NoFairFeatures { .. } => "no_fair_features",
            Error::DegenerateSplit(_) => "degenerate_split",
            Error::Unreachable { .. } => "unreachable",
            Error::Divergence { .. } => "divergence",
            Error::Singular(_) => "singular",
            Error::TooManyFeatures(_) => "too_many_features",
            Error::AllFeaturesUnfair => "all_features_unfair",
            Error::GroupTooSmall { .. } => "group_too_small",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
