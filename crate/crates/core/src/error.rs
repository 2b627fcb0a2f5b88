use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-domain input supplied by the caller.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} has infinite alignment")]
    InfiniteAlignment { index: usize },

    #[error("singular system: {0}")]
    Singular(String),

    /// A structural property expected of a locally optimal planar
    /// configuration does not hold.
    #[error("structural violation: {0}")]
    Structure(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Something that should be impossible (solver cycling, unbounded
    /// bounded program). Treated as a bug signal.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// Strips any stage labels and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True when the error originates from caller input rather than a
    /// numerical or structural finding.
    pub fn is_input(&self) -> bool {
        matches!(self.root(), Error::Input(_) | Error::Dimension(_))
    }
}

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
