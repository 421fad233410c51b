use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum HawkesError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid event sequence: {0}")]
    InvalidEvents(String),

    #[error("invalid bin specification: {0}")]
    InvalidBins(String),

    #[error("event at t = {time} lies outside the bins [{lower}, {upper})")]
    EventOutsideBins { time: f64, lower: f64, upper: f64 },

    #[error("simulation exceeded the event cap of {cap}")]
    ExplosionGuard { cap: usize },

    #[error("log-likelihood is not finite")]
    NonFiniteLogLik,

    #[error("objective is not finite at the starting point")]
    ObjectiveNonFinite,

    #[error("{bins} bins are too few for lag p = {lag}")]
    TooFewBins { bins: usize, lag: usize },

    #[error("design matrix is singular (condition estimate {condition:e})")]
    SingularDesign { condition: f64 },

    #[error("exponential fit failed: {0}")]
    FitFailure(String),

    #[error("all bin counts are zero")]
    AllZeroCounts,

    #[error("inverse-CDF root finding failed to bracket on [{lower}, {upper}]")]
    RootFindFailure { lower: f64, upper: f64 },

    #[error("importance weights degenerate for {iterations} consecutive iterations (last ESS {ess})")]
    DegenerateWeights { iterations: usize, ess: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("nothing to summarize or plot")]
    EmptySummary,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HawkesError>;

impl HawkesError {
    /// Variant name, stable across message wording.
    pub fn kind(&self) -> &'static str {
        match self {
            HawkesError::InvalidParams(_) => "InvalidParams",
            HawkesError::InvalidEvents(_) => "InvalidEvents",
            HawkesError::InvalidBins(_) => "InvalidBins",
            HawkesError::EventOutsideBins { .. } => "EventOutsideBins",
            HawkesError::ExplosionGuard { .. } => "ExplosionGuard",
            HawkesError::NonFiniteLogLik => "NonFiniteLogLik",
            HawkesError::ObjectiveNonFinite => "ObjectiveNonFinite",
            HawkesError::TooFewBins { .. } => "TooFewBins",
            HawkesError::SingularDesign { .. } => "SingularDesign",
            HawkesError::FitFailure(_) => "FitFailure",
            HawkesError::AllZeroCounts => "AllZeroCounts",
            HawkesError::RootFindFailure { .. } => "RootFindFailure",
            HawkesError::DegenerateWeights { .. } => "DegenerateWeights",
            HawkesError::Config(_) => "Config",
            HawkesError::EmptySummary => "EmptySummary",
            HawkesError::Io(_) => "Io",
            HawkesError::Json(_) => "Json",
            HawkesError::Csv(_) => "Csv",
        }
    }
}
