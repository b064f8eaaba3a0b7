use thiserror::Error;

use crate::judgment::InvalidJudgment;
use crate::matrix::Pair;

/// Errors from matrix construction, weighting, and consistency checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AhpError {
    #[error("matrix order must be at least 2, got {n}")]
    InvalidOrder { n: usize },

    #[error("incomplete matrix: missing {}", fmt_named(.named))]
    IncompleteMatrix {
        missing: Vec<Pair>,
        named: Vec<(String, String)>,
    },

    #[error("duplicate judgment for ({row_label}, {col_label})")]
    DuplicateJudgment {
        row: usize,
        col: usize,
        row_label: String,
        col_label: String,
    },

    #[error("pair ({row}, {col}) is not an upper-triangle cell of an order-{n} matrix")]
    PairOutOfRange { row: usize, col: usize, n: usize },

    #[error(transparent)]
    InvalidJudgment(#[from] InvalidJudgment),

    #[error("entry ({row}, {col}) must be strictly positive")]
    NonPositiveEntry { row: usize, col: usize },

    #[error("duplicate criterion label `{label}`")]
    DuplicateLabel { label: String },

    #[error("expected {expected} labels, found {found}")]
    LabelMismatch { expected: usize, found: usize },

    #[error("not a permutation of the criterion indices")]
    InvalidPermutation,

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("no random index tabulated for order {n}")]
    UnsupportedOrder { n: usize },

    #[error("weights must be non-negative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },

    #[error("matrix storage is malformed: {0}")]
    Malformed(String),
}

fn fmt_named(named: &[(String, String)]) -> String {
    named
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}
