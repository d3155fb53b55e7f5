use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space spec: {0}")]
    InvalidSpec(String),

    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },

    #[error("nonpositive weight {value} at point {point}")]
    NonPositiveWeight { point: usize, value: f64 },

    #[error("unknown point id {0}")]
    UnknownPoint(usize),

    #[error("asymmetric distance: d({a},{b}) = {ab} but d({b},{a}) = {ba}")]
    AsymmetricDistance { a: usize, b: usize, ab: f64, ba: f64 },

    #[error("invalid distance between {a} and {b}: {value}")]
    InvalidDistance { a: usize, b: usize, value: f64 },

    #[error("triangle inequality violated on ({a},{b},{c}): d(a,c) = {ac} > d(a,b) + d(b,c) = {via}")]
    TriangleViolation {
        a: usize,
        b: usize,
        c: usize,
        ac: f64,
        via: f64,
    },

    #[error("space too large: {n} points exceeds the explicit-matrix cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("kernel evaluated on the diagonal at point {0}")]
    Diagonal(usize),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid convex body: {0}")]
    InvalidBody(String),

    #[error("asymmetric convex body: vertex {0:?} has no antipode")]
    AsymmetricBody([f64; 2]),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("field length {got} does not match space size {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("non-finite field value at point {0}")]
    NonFiniteField(usize),

    #[error("function is not 1-Lipschitz between breakpoints {0} and {1}")]
    NotLipschitz(usize, usize),

    #[error("point {0} has no neighbors")]
    IsolatedPoint(usize),

    #[error("no path with length in [{lo}, {hi}] exists")]
    NoPath { lo: f64, hi: f64 },

    #[error("not enough points to extrapolate: need at least 3, got {0}")]
    TooFewPoints(usize),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("malformed space file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "exponent must be >= 1",
        })
    }
}

pub(crate) fn check_fraction(name: &'static str, s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: s,
            reason: "must lie in (0, 1)",
        })
    }
}
