use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] sapgm_core::error::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Self::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 3 for I/O trouble, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use sapgm_core::error::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Solver(
                E::InvalidParameter { .. } | E::UnknownProblem(_) | E::DimensionMismatch { .. },
            ) => 2,
            Self::Solver(_) => 1,
            Self::Io { .. } | Self::Csv { .. } => 3,
        }
    }
}
