use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} outside domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("model schema error: {0}")]
    Schema(String),
    #[error("model not admissible: {0}")]
    Admissibility(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("step size underflow at s = {s} (h = {h})")]
    StepSizeUnderflow { s: f64, h: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("shooting did not converge; distance bracketed in [{lower}, {upper}]")]
    NoConvergence { lower: f64, upper: f64 },
    #[error("path does not start at the query point (offset {offset})")]
    PathMismatch { offset: f64 },
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),
    #[error("side {c} exceeds {c_max}, the largest distance between the two parallels")]
    DoesNotFit { c: f64, c_max: f64 },
    #[error("degenerate triangle: {0}")]
    Degenerate(String),
    #[error("distance not monotone in the pole angle: {0}")]
    NotMonotone(String),
    #[error("curvature dominance fails at t = {t}: {g_m} < {g_model}")]
    Dominance { t: f64, g_m: f64, g_model: f64 },
    #[error("unstable: {0}")]
    Unstable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
