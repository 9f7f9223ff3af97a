use std::path::PathBuf;

/// Errors produced by the simulator and the analytic engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual} ({context})")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range (have {len} symbols)")]
    OutOfRange { index: usize, len: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),

    #[error("root finder did not converge: {0}")]
    NonConvergence(String),

    #[error("quadrature did not converge (error estimate {error_estimate:e}, target {target:e})")]
    Quadrature { error_estimate: f64, target: f64 },

    #[error("Padé singular at every order down to [{lowest_l}/{lowest_m}]")]
    PadeSingular { lowest_l: usize, lowest_m: usize },

    #[error("evaluation at eps = {eps} is within the guard band of a Padé pole at eps = {pole_eps}")]
    PadePole { eps: f64, pole_eps: f64 },

    #[error("Padé MGF at eps = {eps} is {pade:e}, direct integral gives {direct:e}")]
    PadeResidual { eps: f64, pade: f64, direct: f64 },

    #[error("series coefficient {index} is not finite")]
    CoefficientOverflow { index: usize },

    #[error("value {value} outside admissible range [{lo}, {hi}] ({what})")]
    OutOfAdmissibleRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config { .. } => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
