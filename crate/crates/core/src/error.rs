use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} has zero norm")]
    ZeroNorm(&'static str),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("Kronecker factor {term} is not Hermitian (relative change {change:.3e})")]
    NkpHermitization { term: usize, change: f64 },

    #[error("operation requires a real tensor")]
    UnsupportedField,

    #[error("rank-1 operator failed at component {r}, sweep {l}: {source}")]
    Rank1Failure {
        r: usize,
        l: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("theorem checks need a trace produced by the best rank-1 oracle (got `{0}`)")]
    WrongProvenance(String),

    #[error("trace was recorded without tensor retention")]
    MissingTensors,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
