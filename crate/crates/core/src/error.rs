use thiserror::Error;

/// Errors raised anywhere in the testing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid phenotype: {0}")]
    Phenotype(String),

    #[error("invalid covariates: {0}")]
    Covariate(String),

    #[error("covariate design is rank deficient ({rank} of {cols} columns independent)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("logistic null fit failed: perfect separation detected after {iterations} iterations")]
    PerfectSeparation { iterations: usize },

    #[error("logistic null fit failed: IRLS did not converge in {iterations} iterations (gradient norm {gradient_norm:e})")]
    IrlsDivergence { iterations: usize, gradient_norm: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid permutation plan: {0}")]
    Plan(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable kind, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Dimension(_) => "dimension",
            Error::Phenotype(_) => "phenotype",
            Error::Covariate(_) => "covariate",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::PerfectSeparation { .. } => "perfect_separation",
            Error::IrlsDivergence { .. } => "irls_divergence",
            Error::Degenerate(_) => "degenerate",
            Error::Plan(_) => "plan",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Errors that make a simulated replicate unusable rather than signal a bug.
    pub fn is_degenerate_data(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::Phenotype(_)
                | Error::PerfectSeparation { .. }
                | Error::IrlsDivergence { .. }
                | Error::RankDeficient { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
