use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{low}, {high}]: {reason}")]
    InvalidInterval { low: f64, high: f64, reason: &'static str },

    #[error("intervals [{a_low}, {a_high}] and [{b_low}, {b_high}] do not overlap")]
    Disjoint {
        a_low: f64,
        a_high: f64,
        b_low: f64,
        b_high: f64,
    },

    #[error("service `{service}`: {reason}")]
    InvalidService { service: String, reason: String },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("invalid market model: {0}")]
    InvalidMarket(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate regression input: {0}")]
    Degenerate(String),

    #[error("{count} services exceed the landscape cap of {cap}")]
    TooManyServices { count: usize, cap: usize },

    #[error("no overlapping pairs in {experiments} experiments")]
    NoOverlap { experiments: u64 },
}
