//! Crate-wide error type. Variants mirror the failure modes of the public
//! operations so callers can match on them directly.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("bad matrix shape: {0}")]
    Shape(String),

    #[error("not a valid operator: {0}")]
    InvalidOperator(String),

    #[error("classical model does not match the network: {0}")]
    ModelMismatch(String),

    #[error("unknown party `{0}`")]
    UnknownParty(String),

    #[error("`{source_node}` -> `{party}` is not an edge of the network")]
    NotAnEdge { source_node: String, party: String },

    #[error("do-conditional not identifiable: divisor {value:.3e} below 1e-9 at {event}")]
    ZeroDivisor { event: String, value: f64 },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("inflation wiring inconsistent: {0}")]
    WiringInconsistent(String),

    #[error("unknown behavior reference `{0}`")]
    UnknownBehaviorReference(String),

    #[error("unknown atom reference `{0}`")]
    UnknownAtomReference(String),

    #[error("party `{0}` is not binary")]
    CardinalityMismatch(String),

    #[error("LP neither feasible at 1e-9 nor certified infeasible at 1e-8; tighten tolerances or use the exact rational mode")]
    NumericallyAmbiguous,

    #[error("no feasibility transition on the probed visibility interval: {0}")]
    NoTransition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
