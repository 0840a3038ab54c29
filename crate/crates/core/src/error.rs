use thiserror::Error;

/// Errors raised by the geometric and numerical routines of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frame word of length {0} exceeds the supported order 3")]
    UnsupportedOrder(usize),

    #[error("jet of order {needed} required, field provides {available}")]
    Capability { needed: usize, available: usize },

    #[error("finite-difference step {0} outside (0, 0.1)")]
    StepRange(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("|mu| = {0} violates the orientation bound |mu| < 1")]
    OrientationViolation(f64),

    #[error("orientation degeneracy at {context}: {detail}")]
    OrientationDegeneracy { context: String, detail: String },

    #[error("chart error: {0}")]
    Chart(String),

    #[error("field is singular at r = {r:.3e} ({field})")]
    Singularity { field: String, r: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("curve resampling error: {0}")]
    Resampling(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("path construction error: {0}")]
    PathConstruction(String),

    #[error("degenerate map: {0}")]
    DegenerateMap(String),

    #[error("hypothesis '{hypothesis}' failed: {detail}")]
    Condition { hypothesis: String, detail: String },

    #[error("at grid point {index} ({point}): {source}")]
    AtGridPoint {
        index: usize,
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
