use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller broke a documented precondition (lengths, signs, ranges).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Peak or characteristic ordering is broken beyond repair.
    #[error("invalid configuration: {0}")]
    Configuration(String),

    /// Two peaks coincide while carrying different heights.
    #[error("singular configuration at interval {index}: dy = {dy:e}, du = {du:e}")]
    Singular { index: usize, dy: f64, du: f64 },

    /// A cell collapsed during initialization; use measure initialization instead.
    #[error("degenerate cell {index} at initialization (D+y = {dy:e})")]
    DegenerateCell { index: usize, dy: f64 },

    #[error("linear solve failed: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        last_state: Vec<f64>,
    },

    #[error("no event found in [{t0}, {t1}]")]
    EventNotFound { t0: f64, t1: f64 },

    #[error("fast and naive summation disagree (relative difference {rel:e})")]
    Consistency { rel: f64 },

    #[error("scheme `{scheme}` is not available for experiment `{experiment}`: {reason}")]
    Incompatible {
        experiment: String,
        scheme: String,
        reason: String,
    },

    #[error("numerical failure: {0}")]
    NonFinite(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn ensure_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Contract(format!(
            "{what}: length {got}, expected {want}"
        )));
    }
    Ok(())
}
