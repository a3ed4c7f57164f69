use thiserror::Error;

/// Errors produced by the numerical core and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("operator is not Hermitian (max |A - A^H| = {defect:e})")]
    NonHermitian { defect: f64 },

    #[error("scenario has no local tensor structure")]
    MissingStructure,

    #[error("local structure {dim_a}x{dim_b} does not factor dimension {dim}")]
    InvalidStructure {
        dim_a: usize,
        dim_b: usize,
        dim: usize,
    },

    #[error("LHV weights invalid: {0}")]
    InvalidWeights(String),

    #[error("LHV response value {value} for outcome {lambda} is not in {{-1, 0, +1}}")]
    InvalidResponse { lambda: usize, value: i8 },

    #[error("mode index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("field has zero total intensity")]
    ZeroField,

    #[error("invalid field model: {0}")]
    InvalidModel(String),

    #[error("invalid detector configuration: {0}")]
    InvalidDetector(String),

    #[error("detector {detector} cannot measure a {source_kind} source")]
    IncompatibleSourceDetector {
        source_kind: &'static str,
        detector: &'static str,
    },

    #[error("record has {found} channels, expected {expected}")]
    ChannelCountMismatch { expected: usize, found: usize },

    #[error("ratio pc/(p1*p2) is undefined: a channel recorded no clicks")]
    UndefinedRatio,

    #[error("CHSH setting {0} has no counted trials")]
    EmptySetting(usize),

    #[error("custom intensity table line {line}: {message}")]
    IntensityTable { line: u64, message: String },

    #[error("config error at `{path}`{location}: {message}")]
    Config {
        path: String,
        location: String,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical invariants (as opposed to bad input or config).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonHermitian { .. }
                | Error::ZeroVector { .. }
                | Error::ZeroField
                | Error::UndefinedRatio
        )
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            location: String::new(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
