use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("position {x} lies outside [0, 1]")]
    Domain { x: f64 },

    #[error("pair is not controllable: {0}")]
    Uncontrollable(String),

    #[error("pair is not observable: {0}")]
    Unobservable(String),

    #[error("matrix is not Hurwitz: eigenvalue with real part {re:e}")]
    UnstableMatrix { re: f64 },

    #[error("no feasible gain on the candidate grid: {0}")]
    NoFeasibleGain(String),

    #[error("simulation diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("horizon too short: {0}")]
    InsufficientHorizon(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("config error at `{key}`{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
