//! Reference data for the built-in CI criteria set: the consensus judgment
//! matrix, its published weights, and two case-study score sheets.
//!
//! Used by `verify-paper`, the acceptance suite, and as fixtures.

use crate::criteria::{builtin_ci_criteria, Evaluation, Normalization, RubricScore};
use crate::judgment::Saaty;
use crate::matrix::{upper_pairs, Pair, PairwiseMatrix};
use crate::weights::WeightVector;

/// Upper triangle of the consensus matrix, row by row (45 entries).
const CONSENSUS_UPPER: [&str; 45] = [
    // C1 vs C2..C10
    "2", "7", "5", "7", "7", "7", "5", "9", "7",
    // C2 vs C3..C10
    "7", "5", "7", "7", "7", "3", "9", "7",
    // C3 vs C4..C10
    "1/3", "1/3", "2", "3", "1/3", "3", "3",
    // C4 vs C5..C10
    "2", "3", "3", "1/3", "5", "3",
    // C5 vs C6..C10
    "3", "3", "1/3", "5", "3",
    // C6 vs C7..C10
    "3", "1/5", "3", "3",
    // C7 vs C8..C10
    "1/5", "3", "2",
    // C8 vs C9..C10
    "7", "5",
    // C9 vs C10
    "1/3",
];

/// Published weights for C1..C10.
pub const PUBLISHED_WEIGHTS: [f64; 10] = [0.317, 0.254, 0.046, 0.079, 0.066, 0.039, 0.028, 0.130, 0.016, 0.025];
pub const PUBLISHED_LAMBDA_MAX: f64 = 10.92;
pub const PUBLISHED_COI: f64 = 0.102;
pub const PUBLISHED_COR: f64 = 0.069;

pub const POWERCYBER: &str = "PowerCyber";
pub const ENIGMA: &str = "ENIGMA";
pub const POWERCYBER_SCORES: [u8; 10] = [5, 3, 2, 2, 1, 3, 5, 1, 1, 1];
pub const ENIGMA_SCORES: [u8; 10] = [3, 1, 3, 4, 2, 3, 5, 4, 2, 2];
pub const ENIGMA_PUBLISHED_COMPOSITE: f64 = 2.65;
/// Printed composite for PowerCyber. Not reproducible from its own scores
/// and weights, whose dot product is 3.091.
pub const POWERCYBER_PRINTED_COMPOSITE: f64 = 3.28;

/// The 45 consensus judgments as `((row, col), intensity)`.
pub fn consensus_judgments() -> Vec<(Pair, Saaty)> {
    upper_pairs(10)
        .zip(CONSENSUS_UPPER)
        .map(|(p, s)| (p, s.parse().expect("scale value")))
        .collect()
}

/// Consensus matrix labelled C1..C10.
pub fn consensus_matrix() -> PairwiseMatrix {
    PairwiseMatrix::from_judgments(builtin_ci_criteria().ids(), &consensus_judgments()).expect("complete triangle")
}

pub fn published_weights() -> WeightVector {
    WeightVector::supplied(builtin_ci_criteria().ids(), PUBLISHED_WEIGHTS.to_vec()).expect("sums to one")
}

fn sheet(values: &[u8; 10], notes: &[&str; 10]) -> Vec<RubricScore> {
    values
        .iter()
        .zip(notes)
        .enumerate()
        .map(|(i, (&v, note))| RubricScore::new(&format!("C{}", i + 1), v as i64, note).expect("valid score"))
        .collect()
}

pub fn powercyber_scores() -> Vec<RubricScore> {
    sheet(
        &POWERCYBER_SCORES,
        &[
            "SCADA stack, physical relays/PMUs, DNP3 / IEC 61850 / C37.118, HitL simulators",
            "VM per tenant, firewalls, VPN",
            "simulator size and device count cap concurrent users",
            "template-driven experiments",
            "no update automation documented",
            "web UI over complex SCADA tooling",
            "browser-based remote access",
            "no scoring or debrief engine; raw logs and pcaps",
            "physical hardware and simulators",
            "academic testbed, no vendor",
        ],
    )
}

pub fn enigma_scores() -> Vec<RubricScore> {
    sheet(
        &ENIGMA_SCORES,
        &[
            "CAN-bus digital twin, simulated sensors, no HitL",
            "no multi-user isolation documented",
            "cloud-hosted, limited concurrency",
            "DTDL custom models, open source",
            "no update automation documented",
            "gamified UI, SHAP explanations, no usability study",
            "browser-accessible cloud service",
            "CTF-style game with analytics",
            "consumption-priced cloud PaaS",
            "open-source prototype, no commercial support",
        ],
    )
}

/// Both case studies aggregated under `weights` (raw 1–5 scale).
pub fn case_study_evaluations(weights: &WeightVector) -> Vec<Evaluation> {
    let set = builtin_ci_criteria();
    [(POWERCYBER, powercyber_scores()), (ENIGMA, enigma_scores())]
        .into_iter()
        .map(|(name, s)| crate::criteria::evaluate(name, &set, &s, weights, Normalization::Raw).expect("complete sheet"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_matches_published_rows() {
        let m = consensus_matrix();
        assert!(m.is_elicited());
        assert_eq!(m.entry(8, 0).to_string(), "1/9");
        assert_eq!(m.entry(2, 5).to_string(), "2");
        assert_eq!(m.entry(5, 2).to_string(), "1/2");
        assert_eq!(m.entry(9, 6).to_string(), "1/2");
        assert_eq!(m.entry(7, 1).to_string(), "1/3");
        // full lower row of C9 as printed
        let row9: Vec<String> = (0..10).map(|j| m.entry(8, j).to_string()).collect();
        assert_eq!(row9, ["1/9", "1/9", "1/3", "1/5", "1/5", "1/3", "1/3", "1/7", "1", "1/3"]);
    }

    #[test]
    fn published_weights_sum_to_one() {
        let s: f64 = PUBLISHED_WEIGHTS.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}
