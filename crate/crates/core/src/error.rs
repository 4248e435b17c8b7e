use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage that produced an error inside a composite fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    BetweenLayer,
    Subspaces,
    WithinLayer,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::BetweenLayer => "between-layer clustering",
            Stage::Subspaces => "subspace estimation",
            Stage::WithinLayer => "within-layer clustering",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("layer {layer} has fewer than {needed} nonzero eigenvalues")]
    RankDeficientLayer { layer: usize, needed: usize },
    #[error("aggregated matrix of group {group} has fewer than {needed} nonzero eigenvalues")]
    RankDeficientGroup { group: usize, needed: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported size: {0}")]
    Unsupported(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerics (rank deficiency, non-convergence)
    /// rather than by malformed inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::RankDeficientLayer { .. }
            | Error::RankDeficientGroup { .. }
            | Error::Numerical(_) => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
