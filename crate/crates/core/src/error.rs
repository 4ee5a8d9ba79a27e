use thiserror::Error;

/// Errors raised by the census, counting, sampling and asymptotics layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice: generators do not span a full-rank sublattice")]
    DegenerateLattice,

    #[error("quotient not simple: minimum distance {min_distance} < 3")]
    QuotientNotSimple { min_distance: u64 },

    #[error(
        "pure-translation census not asymptotically exact below r*(d): d={d} requires r >= {r_star}, got r={r}"
    )]
    RadiusBelowThreshold { d: usize, r: u64, r_star: u64 },

    #[error("empty support: no {what} of order {n}")]
    EmptySupport { what: &'static str, n: u64 },

    #[error("census covers indices up to {have}, but {need} is required")]
    MissingCensus { have: u64, need: u64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("saddle not bracketed for n={n}")]
    SaddleNotBracketed { n: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
