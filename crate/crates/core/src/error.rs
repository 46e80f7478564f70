use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exact enumeration over n = {n} coordinates exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("function is not Boolean-valued: saw {0}")]
    NonBoolean(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("L1 solver did not converge after {iterations} iterations (incumbent objective {objective})")]
    SolverNonConvergence {
        iterations: usize,
        objective: f64,
        incumbent: Vec<f64>,
    },

    #[error("no polynomial of degree <= {cap} reached sup error {target} (best {best})")]
    DegreeCap { cap: usize, target: f64, best: f64 },

    #[error("quadrature did not converge: estimated error {0}")]
    Quadrature(f64),

    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },

    #[error("unknown lemma check `{0}`")]
    UnknownCheck(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(format!("{name} = {v} must lie in [0, 1]")))
    }
}
