use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// |λ| reached the saturation flux linkage of the core reluctance model.
    #[error("flux linkage {lambda} Wb outside saturation bound {lambda_sat} Wb")]
    Saturation { lambda: f64, lambda_sat: f64 },

    /// The fringing denominator of the gap reluctance is not positive.
    #[error("gap reluctance undefined at theta = {theta} rad (fringing denominator {denominator})")]
    GapDomain { theta: f64, denominator: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate interval [{start}, {end}]")]
    DegenerateInterval { start: f64, end: f64 },

    #[error("resistance probe failed: {0}")]
    Probe(String),

    #[error("simulation failed at t = {time} s: {source}")]
    Simulation {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("audio record does not cover the cost window [{start}, {end}] s")]
    WindowNotCovered { start: f64, end: f64 },

    #[error("cost normalization requested without a baseline median")]
    MissingBaseline,

    #[error("percentiles of an empty set")]
    EmptyInput,

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("trial diverged at operation {operation}: {reason}")]
    Divergence { operation: usize, reason: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
