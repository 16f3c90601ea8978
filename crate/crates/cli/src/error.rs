use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] perils_core::Error),
}

impl CliError {
    /// 2 for bad input, 3 when a solver finds no root or fails to converge.
    pub fn exit_code(&self) -> i32 {
        use perils_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Model(e) if e.is_solver_failure() => 3,
            CliError::Model(E::InvalidParam { .. } | E::Divergence { .. } | E::Data(_)) => 2,
            CliError::Model(E::Stage { source, .. })
                if matches!(**source, E::InvalidParam { .. } | E::Data(_)) =>
            {
                2
            }
            CliError::Model(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
