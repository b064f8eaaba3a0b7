//! Consistency index, consistency ratio, and inconsistency localization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::AhpError;
use crate::matrix::{upper_pairs, PairwiseMatrix};
use crate::weights::perron;

/// Conventional acceptance threshold on the consistency ratio.
pub const DEFAULT_THRESHOLD: f64 = 0.10;
/// Orders with a zero random index are accepted when `CoI` is below this.
pub const ZERO_INDEX_TOL: f64 = 1e-9;

/// Random consistency index by matrix order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomIndexTable(BTreeMap<usize, f64>);

const SAATY_RANDOM_INDEX: [(usize, f64); 14] = [
    (2, 0.0),
    (3, 0.58),
    (4, 0.90),
    (5, 1.12),
    (6, 1.24),
    (7, 1.32),
    (8, 1.41),
    (9, 1.45),
    (10, 1.49),
    (11, 1.51),
    (12, 1.54),
    (13, 1.56),
    (14, 1.57),
    (15, 1.58),
];

impl Default for RandomIndexTable {
    fn default() -> Self {
        RandomIndexTable(SAATY_RANDOM_INDEX.iter().copied().collect())
    }
}

impl RandomIndexTable {
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        RandomIndexTable(entries.into_iter().collect())
    }

    pub fn get(&self, n: usize) -> Result<f64, AhpError> {
        self.0.get(&n).copied().ok_or(AhpError::UnsupportedOrder { n })
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }
}

/// Random index for order `n` from the default table (orders 2–15).
pub fn random_index(n: usize) -> Result<f64, AhpError> {
    RandomIndexTable::default().get(n)
}

/// Log-deviation of one upper-triangle judgment from the fitted priorities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentDeviation {
    pub row: usize,
    pub col: usize,
    pub row_label: String,
    pub col_label: String,
    /// Entered value as text, e.g. `"1/5"`.
    pub value: String,
    /// Ratio `w_row / w_col` implied by the priorities.
    pub implied: f64,
    /// `|ln(a_ij · w_j / w_i)|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n: usize,
    pub lambda_max: f64,
    pub coi: f64,
    pub roi: f64,
    /// `None` when the random index is zero (orders ≤ 2).
    pub cor: Option<f64>,
    pub threshold: f64,
    pub acceptable: bool,
    /// All upper-triangle judgments, largest deviation first.
    pub worst_judgments: Vec<JudgmentDeviation>,
}

impl ConsistencyReport {
    /// Value used to rank attempts: `cor`, or `coi` when the ratio is undefined.
    pub fn severity(&self) -> f64 {
        self.cor.unwrap_or(self.coi)
    }

    pub fn top(&self, k: usize) -> &[JudgmentDeviation] {
        &self.worst_judgments[..k.min(self.worst_judgments.len())]
    }
}

pub fn consistency(m: &PairwiseMatrix, table: &RandomIndexTable, threshold: f64) -> Result<ConsistencyReport, AhpError> {
    let n = m.order();
    let roi = table.get(n)?;
    let sol = perron(m)?;
    let coi = (sol.lambda_max - n as f64) / (n as f64 - 1.0);
    let (cor, acceptable) = if roi > 0.0 {
        let cor = coi / roi;
        (Some(cor), cor <= threshold)
    } else {
        (None, coi <= ZERO_INDEX_TOL)
    };
    let w = &sol.vector;
    let labels = m.labels();
    let mut worst: Vec<JudgmentDeviation> = upper_pairs(n)
        .map(|(i, j)| {
            let a = m.entry(i, j);
            let implied = w[i] / w[j];
            JudgmentDeviation {
                row: i,
                col: j,
                row_label: labels[i].clone(),
                col_label: labels[j].clone(),
                value: a.to_string(),
                implied,
                deviation: (a.ln() + w[j].ln() - w[i].ln()).abs(),
            }
        })
        .collect();
    worst.sort_by(|a, b| {
        b.deviation
            .total_cmp(&a.deviation)
            .then(a.row.cmp(&b.row))
            .then(a.col.cmp(&b.col))
    });
    Ok(ConsistencyReport {
        n,
        lambda_max: sol.lambda_max,
        coi,
        roi,
        cor,
        threshold,
        acceptable,
        worst_judgments: worst,
    })
}

/// Consistency with the default table and threshold.
pub fn check(m: &PairwiseMatrix) -> Result<ConsistencyReport, AhpError> {
    consistency(m, &RandomIndexTable::default(), DEFAULT_THRESHOLD)
}
