//! Crate-wide error type. Every failure mode is named; nothing panics on bad
//! user input.

use crate::halfint::HalfInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid irrep label: {0}")]
    InvalidLabel(String),

    #[error("group mismatch: expected {expected}, got {got}")]
    GroupMismatch { expected: String, got: String },

    #[error("axis {axis} out of range 1..={n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("band limit {requested} needs {nodes} quadrature nodes, exceeding the budget of {budget}")]
    MemoryBudget {
        requested: HalfInt,
        nodes: u128,
        budget: u128,
    },

    #[error("grid/function mismatch: {0}")]
    GridMismatch(String),

    #[error("coefficient support {support} exceeds grid band limit {band_limit}")]
    SupportExceedsGrid { support: HalfInt, band_limit: HalfInt },

    #[error("label range of the symbol (limit {limit}) is insufficient for support {needed}")]
    LabelRangeInsufficient { limit: HalfInt, needed: HalfInt },

    #[error("symbol is not dense up to {needed}: missing label {missing}")]
    NotDense { needed: HalfInt, missing: String },

    #[error("difference order violation: q(identity) = {value:.3e} exceeds 1e-12 but order >= 1 was claimed")]
    OrderViolation { value: f64 },

    #[error("difference factor {0} is not a first-order component for this group")]
    InvalidDifferenceFactor(String),

    #[error("truncation budget exhausted: trusted cutoff would drop below zero (input trusted {trusted}, total shrink {shrink})")]
    BudgetExhausted { trusted: HalfInt, shrink: HalfInt },

    #[error("shift {c} is within 1e-9 of the exceptional set: singular at (l, m) = ({l}, {m})")]
    SingularShift { c: String, l: HalfInt, m: HalfInt },

    #[error("operator {op} is not defined on {group}")]
    UnsupportedOperator { op: String, group: String },

    #[error("exponent out of range: {0}")]
    InvalidExponent(f64),

    #[error("insufficient data for fit: need at least 3 distinct weights, found {0}")]
    InsufficientData(usize),

    #[error("grid function is not band-limited within the grid: round-trip residual {residual:.3e} at {context}")]
    Aliasing { residual: f64, context: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
