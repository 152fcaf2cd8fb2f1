use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A selected column is (numerically) in the span of the columns chosen before it.
    #[error("rank deficient: column {column} has residual norm {residual:e} below tolerance {tolerance:e}")]
    RankDeficient {
        column: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid dictionary spec: {0}")]
    InvalidSpec(String),

    #[error("invalid sparsity: K = {k} for dimension n = {n}")]
    InvalidSparsity { k: usize, n: usize },

    #[error("measurement energy is zero, snr is undefined")]
    ZeroSignal,

    #[error("need {wanted} candidates but only {available} are available")]
    NotEnoughCandidates { wanted: usize, available: usize },

    #[error("need {wanted} candidates with nonzero projected norm but only {available} exist")]
    DegenerateCandidates { wanted: usize, available: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("enumerating {supports} supports exceeds the budget of {budget}")]
    BudgetExceeded { supports: u128, budget: u128 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no recovery guarantee: {0}")]
    NoGuarantee(String),

    #[error("ground-truth signal is required")]
    GroundTruthRequired,

    #[error("no closed-form flop count for {0}")]
    NotModeled(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable label, used to bucket per-trial failures in sweeps.
    pub fn cause(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InvalidSparsity { .. } => "invalid_sparsity",
            Error::ZeroSignal => "zero_signal",
            Error::NotEnoughCandidates { .. } => "not_enough_candidates",
            Error::DegenerateCandidates { .. } => "degenerate_candidates",
            Error::ConfigInvalid(_) => "config_invalid",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::InvalidParams(_) => "invalid_params",
            Error::NoGuarantee(_) => "no_guarantee",
            Error::GroundTruthRequired => "ground_truth_required",
            Error::NotModeled(_) => "not_modeled",
            Error::Parse(_) => "parse",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
