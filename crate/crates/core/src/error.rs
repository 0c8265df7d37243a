use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty vocabulary")]
    EmptyVocab,
    #[error("invalid n-gram orders: {0}")]
    InvalidOrders(String),
    #[error("vocab/model mismatch: {0}")]
    VocabModelMismatch(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot sample negatives from a batch of {0} pair(s)")]
    CannotSampleNegatives(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("n-gram not in model: {0:?}")]
    NgramNotInModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite parameter after batch {batch} of epoch {epoch}")]
    NonFinite { epoch: usize, batch: usize },
    #[error("not a model file")]
    NotAModelFile,
    #[error("corrupt model file (expected {expected} bytes)")]
    CorruptModelFile { expected: u64 },
    #[error("invalid model file: {0}")]
    InvalidModelFile(String),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) | Error::InvalidOrders(_) => ErrorKind::Usage,
            Error::NonFinite { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
