//! Positive reciprocal pairwise-comparison matrices.
//!
//! Only the strict upper triangle is stored. The diagonal is implicitly one
//! and every lower entry is the exact reciprocal of its mirror, so
//! `entry(i, j) * entry(j, i) == 1` cannot be violated by any constructed
//! value.

use serde::{Deserialize, Serialize};

use crate::error::AhpError;
use crate::judgment::{Rational, Saaty};

/// An upper-triangle cell `(row, col)` with `row < col`.
pub type Pair = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr")]
pub struct PairwiseMatrix {
    labels: Vec<String>,
    /// Strict upper triangle in row-major order.
    upper: Vec<Rational>,
    /// `true` when every stored entry came from the 17-value intensity scale.
    elicited: bool,
}

#[derive(Deserialize)]
struct MatrixRepr {
    labels: Vec<String>,
    upper: Vec<Rational>,
    elicited: bool,
}

impl TryFrom<MatrixRepr> for PairwiseMatrix {
    type Error = AhpError;

    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        let n = r.labels.len();
        if r.upper.len() != pair_count(n) {
            return Err(AhpError::Malformed(format!(
                "order {n} needs {} upper entries, found {}",
                pair_count(n),
                r.upper.len()
            )));
        }
        let cells: Vec<(Pair, Rational)> = upper_pairs(n).zip(r.upper).collect();
        if r.elicited {
            for &(_, v) in &cells {
                Saaty::try_from(v)?;
            }
        }
        let mut m = Self::assemble(r.labels, &cells)?;
        m.elicited = r.elicited;
        Ok(m)
    }
}

/// Default identifiers `C1..Cn`.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("C{i}")).collect()
}

/// Number of upper-triangle cells for order `n`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All upper-triangle pairs in row-major order.
pub fn upper_pairs(n: usize) -> impl Iterator<Item = Pair> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Builds an elicited matrix of order `n` with default labels.
pub fn build_matrix(n: usize, judgments: &[(Pair, Saaty)]) -> Result<PairwiseMatrix, AhpError> {
    PairwiseMatrix::from_judgments(default_labels(n), judgments)
}

impl PairwiseMatrix {
    /// Builds a matrix from the complete set of upper-triangle judgments.
    pub fn from_judgments(labels: Vec<String>, judgments: &[(Pair, Saaty)]) -> Result<Self, AhpError> {
        let cells: Vec<(Pair, Rational)> = judgments.iter().map(|&(p, s)| (p, s.value())).collect();
        let mut m = Self::assemble(labels, &cells)?;
        m.elicited = true;
        Ok(m)
    }

    /// Builds a programmatic (non-elicited) matrix with arbitrary positive
    /// rational upper entries.
    pub fn from_ratios(labels: Vec<String>, cells: &[(Pair, Rational)]) -> Result<Self, AhpError> {
        Self::assemble(labels, cells)
    }

    /// Perfectly consistent matrix `a_ij = v_i / v_j` for positive integer
    /// priorities `v`.
    pub fn from_priorities(labels: Vec<String>, priorities: &[u64]) -> Result<Self, AhpError> {
        if labels.len() != priorities.len() {
            return Err(AhpError::LabelMismatch {
                expected: priorities.len(),
                found: labels.len(),
            });
        }
        let n = priorities.len();
        let mut cells = Vec::with_capacity(pair_count(n));
        for (i, j) in upper_pairs(n) {
            let r = Rational::new(priorities[i], priorities[j]).ok_or(AhpError::NonPositiveEntry { row: i, col: j })?;
            cells.push(((i, j), r));
        }
        Self::assemble(labels, &cells)
    }

    fn assemble(labels: Vec<String>, cells: &[(Pair, Rational)]) -> Result<Self, AhpError> {
        let n = labels.len();
        if n < 2 {
            return Err(AhpError::InvalidOrder { n });
        }
        let mut seen = std::collections::HashSet::new();
        for (idx, l) in labels.iter().enumerate() {
            if !seen.insert(l.as_str()) {
                return Err(AhpError::DuplicateLabel { label: labels[idx].clone() });
            }
        }
        let mut upper: Vec<Option<Rational>> = vec![None; pair_count(n)];
        for &((i, j), value) in cells {
            if !(i < j && j < n) {
                return Err(AhpError::PairOutOfRange { row: i, col: j, n });
            }
            let slot = &mut upper[upper_index(n, i, j)];
            if slot.is_some() {
                return Err(AhpError::DuplicateJudgment {
                    row: i,
                    col: j,
                    row_label: labels[i].clone(),
                    col_label: labels[j].clone(),
                });
            }
            *slot = Some(value);
        }
        let missing: Vec<Pair> = upper_pairs(n).filter(|&(i, j)| upper[upper_index(n, i, j)].is_none()).collect();
        if !missing.is_empty() {
            let named = missing
                .iter()
                .map(|&(i, j)| (labels[i].clone(), labels[j].clone()))
                .collect();
            return Err(AhpError::IncompleteMatrix { missing, named });
        }
        Ok(PairwiseMatrix {
            labels,
            upper: upper.into_iter().map(|v| v.expect("checked complete")).collect(),
            elicited: false,
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_elicited(&self) -> bool {
        self.elicited
    }

    /// Exact entry `a_ij`.
    pub fn entry(&self, i: usize, j: usize) -> Rational {
        let n = self.order();
        assert!(i < n && j < n, "index ({i}, {j}) out of range for order {n}");
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Rational::ONE,
            std::cmp::Ordering::Less => self.upper[upper_index(n, i, j)],
            std::cmp::Ordering::Greater => self.upper[upper_index(n, j, i)].recip(),
        }
    }

    /// Upper-triangle cells in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (Pair, Rational)> + '_ {
        upper_pairs(self.order()).zip(self.upper.iter().copied())
    }

    /// Upper-triangle cells as intensities, if the matrix is elicited.
    pub fn judgments(&self) -> Option<Vec<(Pair, Saaty)>> {
        self.upper_triangle()
            .map(|(p, r)| Saaty::try_from(r).ok().map(|s| (p, s)))
            .collect()
    }

    /// Dense row-major floating-point copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.order();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j).to_f64()).collect()).collect()
    }

    /// Applies `perm` to rows, columns, and labels: the new criterion `k` is
    /// the old criterion `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, AhpError> {
        let n = self.order();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(AhpError::InvalidPermutation);
        }
        let labels = perm.iter().map(|&k| self.labels[k].clone()).collect();
        let cells: Vec<(Pair, Rational)> = upper_pairs(n).map(|(i, j)| ((i, j), self.entry(perm[i], perm[j]))).collect();
        let mut m = Self::assemble(labels, &cells)?;
        m.elicited = self.elicited;
        Ok(m)
    }

    /// Same matrix with one upper cell replaced. Elicited status is kept only
    /// when the new value is on the intensity scale.
    pub fn with_entry(&self, i: usize, j: usize, value: Rational) -> Result<Self, AhpError> {
        let n = self.order();
        let (i, j, value) = if i < j { (i, j, value) } else { (j, i, value.recip()) };
        if !(i < j && j < n) {
            return Err(AhpError::PairOutOfRange { row: i, col: j, n });
        }
        let mut m = self.clone();
        m.upper[upper_index(n, i, j)] = value;
        m.elicited = self.elicited && Saaty::try_from(value).is_ok();
        Ok(m)
    }
}
