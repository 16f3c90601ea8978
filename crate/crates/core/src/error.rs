use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("series diverges: growth ratio {ratio} is not below 1")]
    Divergence { ratio: f64 },

    #[error("horizon {horizon} too small: tail bound {tail:e} exceeds tolerance")]
    HorizonTooSmall { horizon: usize, tail: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    /// True for root-finding failures (no bracket or no convergence).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NoRoot(_) | Error::NonConvergence { .. } => true,
            Error::Stage { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
