use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} is not a multiple of the grid step {step}")]
    OffGrid { t: f64, step: f64 },

    #[error("requested window [{lo}, {hi}] exceeds stored support [{t_min}, {t_max}]")]
    Support {
        lo: f64,
        hi: f64,
        t_min: f64,
        t_max: f64,
    },

    #[error("trajectory diverged at t = {time} (|u| = {norm})")]
    Divergence { time: f64, norm: f64 },

    #[error("trajectory from shift s = {shift} at point {point:?} diverged at t = {time}")]
    DivergenceAt {
        shift: f64,
        point: Vec<f64>,
        time: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty set where a nonempty one is required: {0}")]
    EmptySet(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid field: {0}")]
    Field(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{what} = {value} exceeds the tolerance {limit}")]
    Tolerance {
        what: String,
        value: f64,
        limit: f64,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::DivergenceAt { .. })
    }
}
