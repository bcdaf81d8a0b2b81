use std::fmt;

/// Which side of the market an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Men's types, indexed by `x` (rows).
    Rows,
    /// Women's types, indexed by `y` (columns).
    Columns,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Rows => f.write_str("row"),
            Side::Columns => f.write_str("column"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{side} margin needs at least 2 types, got {len}")]
    TooFewTypes { side: Side, len: usize },

    #[error("{side} margin entry {index} must be strictly positive, got {value}")]
    NonPositiveMass { side: Side, index: usize, value: f64 },

    #[error("{side} margin sums to {sum}, expected 1")]
    MassNotNormalized { side: Side, sum: f64 },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("entry ({x}, {y}) is not finite")]
    NonFinite { x: usize, y: usize },

    #[error("entry ({x}, {y}) = {value} is negative")]
    NegativeEntry { x: usize, y: usize, value: f64 },

    #[error("{side} sum {index} is {found}, margin requires {expected}")]
    MarginViolation {
        side: Side,
        index: usize,
        expected: f64,
        found: f64,
    },

    #[error("{side} type values must be strictly increasing (violated at index {index})")]
    NotStrictlyIncreasing { side: Side, index: usize },

    #[error("instance has {cells} cells, vertex enumeration is limited to {limit}")]
    InstanceTooLarge { cells: usize, limit: usize },

    #[error("matching equals the barycenter p⊗q, the gauge ray is undefined")]
    RayUndefined,

    #[error("boundary point: ∇I undefined at cell ({x}, {y}) with mass {value}")]
    BoundaryPoint { x: usize, y: usize, value: f64 },

    #[error("kink point: conditional mass at cell ({x}, {y}) is {value}, quantile levels tie")]
    KinkPoint { x: usize, y: usize, value: f64 },

    #[error("IPFP did not converge after {iterations} iterations (margin error {margin_error:e})")]
    NoConvergence { iterations: usize, margin_error: f64 },

    #[error("network simplex exceeded {pivots} pivots")]
    PivotLimit { pivots: usize },

    #[error("gauge normalization is degenerate: <indicator, mu - p⊗q> = {value}")]
    NormalizationDegenerate { value: f64 },

    #[error("empirical sample has no mass on {side} type {index}")]
    DegenerateSample { side: Side, index: usize },

    #[error("households must be at least 1")]
    NoHouseholds,

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
