use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("element index ({m_x}, {m_y}) outside {max_x}x{max_y} array")]
    IndexOutOfRange {
        m_x: usize,
        m_y: usize,
        max_x: usize,
        max_y: usize,
    },

    #[error("invalid phase scheme: {0}")]
    InvalidScheme(String),

    #[error("NotDivisible: group size {q} does not divide element count {m} (remainder {remainder})")]
    NotDivisible { m: usize, q: usize, remainder: usize },

    #[error("length mismatch: {left} weights vs {right} steering entries")]
    LengthMismatch { left: usize, right: usize },

    #[error("NonSquareGeometry: independence condition needs m_x = m_y and d_x = d_y")]
    NonSquareGeometry,

    #[error("noise variance must be {0}")]
    InvalidNoise(&'static str),

    #[error("NoClosedForm: {0} law has no closed-form reference")]
    NoClosedForm(&'static str),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("samples must be sorted in nondecreasing order")]
    Unsorted,

    #[error("empty input")]
    EmptyInput,

    #[error("ZeroNoiseDegenerate: observations are noise-free copies, mutual information is unbounded")]
    ZeroNoiseDegenerate,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for model/parameter problems, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
