//! Multi-criteria evaluation of cyber ranges with pairwise-comparison
//! weighting.
//!
//! The pipeline: define criteria with rubric anchors, obtain pairwise
//! judgments (by hand or from a simulated expert panel), derive priority
//! weights and gate them on the consistency ratio, score alternatives
//! against the rubric, aggregate, and probe the ranking with weight
//! sensitivity sweeps. Projects persist as auditable JSON documents.

pub mod consistency;
pub mod criteria;
pub mod error;
pub mod judgment;
pub mod matrix;
pub mod panel;
pub mod reference;
pub mod sensitivity;
pub mod storage;
pub mod weights;

pub use consistency::{check, consistency, random_index, ConsistencyReport, JudgmentDeviation, RandomIndexTable};
pub use criteria::{builtin_ci_criteria, CriteriaSet, Criterion, Evaluation, Normalization, RubricScore};
pub use error::AhpError;
pub use judgment::{Rational, Saaty};
pub use matrix::{build_matrix, PairwiseMatrix};
pub use weights::{derive_weights, principal_eigenvalue, WeightMethod, WeightVector};
