//! Priority weights from a pairwise matrix.
//!
//! The principal eigenvector is found by power iteration with L1
//! renormalization. A positive matrix has a simple dominant eigenvalue with a
//! strictly positive eigenvector (Perron–Frobenius), so the iteration
//! converges from the uniform start vector; the iteration cap only guards
//! against pathological conditioning.

use serde::{Deserialize, Serialize};

use crate::error::AhpError;
use crate::matrix::PairwiseMatrix;

/// Successive iterates closer than this (L∞) are considered converged.
pub const CONVERGENCE_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 10_000;
/// Tolerance on `Σ w = 1` for explicitly supplied weight vectors.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMethod {
    #[default]
    PrincipalEigenvector,
    GeometricMeanRows,
    /// Weights entered directly instead of derived from a matrix.
    Supplied,
}

impl std::fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightMethod::PrincipalEigenvector => "principal-eigenvector",
            WeightMethod::GeometricMeanRows => "geometric-mean-rows",
            WeightMethod::Supplied => "supplied",
        })
    }
}

impl std::str::FromStr for WeightMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "principal-eigenvector" | "eigenvector" => Ok(WeightMethod::PrincipalEigenvector),
            "geometric-mean-rows" | "geometric-mean" => Ok(WeightMethod::GeometricMeanRows),
            "supplied" => Ok(WeightMethod::Supplied),
            other => Err(format!("unknown weighting method `{other}`")),
        }
    }
}

/// Normalized criterion priorities, aligned with `labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub method: WeightMethod,
}

impl WeightVector {
    /// Validates and wraps an explicit weight vector.
    pub fn new(labels: Vec<String>, weights: Vec<f64>, method: WeightMethod) -> Result<Self, AhpError> {
        if labels.len() != weights.len() {
            return Err(AhpError::LabelMismatch {
                expected: weights.len(),
                found: labels.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > SUM_TOL {
            return Err(AhpError::InvalidWeights { sum });
        }
        Ok(WeightVector { labels, weights, method })
    }

    pub fn supplied(labels: Vec<String>, weights: Vec<f64>) -> Result<Self, AhpError> {
        Self::new(labels, weights, WeightMethod::Supplied)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.weights[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.weights.iter().copied())
    }
}

/// Converged power-iteration state.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronSolution {
    /// L1-normalized principal eigenvector.
    pub vector: Vec<f64>,
    pub lambda_max: f64,
    pub iterations: usize,
    /// `‖M·w − λ·w‖∞ / ‖w‖∞` at the returned vector.
    pub residual: f64,
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn residual(a: &[Vec<f64>], w: &[f64], lambda: f64) -> f64 {
    let mw = mat_vec(a, w);
    let num = mw.iter().zip(w).map(|(m, x)| (m - lambda * x).abs()).fold(0.0, f64::max);
    let den = w.iter().copied().fold(0.0, f64::max);
    num / den
}

/// Power iteration for the Perron vector of a positive matrix.
pub fn perron(m: &PairwiseMatrix) -> Result<PerronSolution, AhpError> {
    let a = m.to_dense();
    let n = a.len();
    let mut w = vec![1.0 / n as f64; n];
    for it in 1..=MAX_ITERATIONS {
        let mut next = mat_vec(&a, &w);
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        let delta = next.iter().zip(&w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        w = next;
        if delta < CONVERGENCE_TOL {
            let lambda_max = rayleigh_mean(&a, &w);
            return Ok(PerronSolution {
                residual: residual(&a, &w, lambda_max),
                vector: w,
                lambda_max,
                iterations: it,
            });
        }
    }
    let lambda = rayleigh_mean(&a, &w);
    Err(AhpError::ConvergenceFailure {
        iterations: MAX_ITERATIONS,
        residual: residual(&a, &w, lambda),
    })
}

/// `λ = (1/n) Σ (M·w)_i / w_i`.
fn rayleigh_mean(a: &[Vec<f64>], w: &[f64]) -> f64 {
    let mw = mat_vec(a, w);
    mw.iter().zip(w).map(|(m, x)| m / x).sum::<f64>() / w.len() as f64
}

pub fn principal_eigenvalue(m: &PairwiseMatrix) -> Result<f64, AhpError> {
    perron(m).map(|p| p.lambda_max)
}

/// Normalized row-wise geometric means, computed in log space.
pub fn geometric_mean_rows(m: &PairwiseMatrix) -> Vec<f64> {
    let n = m.order();
    let logs: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| m.entry(i, j).ln()).sum::<f64>() / n as f64)
        .collect();
    // shift by the max log before exponentiating to keep values in range
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn derive_weights(m: &PairwiseMatrix, method: WeightMethod) -> Result<WeightVector, AhpError> {
    let weights = match method {
        WeightMethod::PrincipalEigenvector => perron(m)?.vector,
        WeightMethod::GeometricMeanRows => geometric_mean_rows(m),
        WeightMethod::Supplied => {
            return Err(AhpError::Malformed("supplied weights are not derived from a matrix".into()))
        }
    };
    Ok(WeightVector {
        labels: m.labels().to_vec(),
        weights,
        method,
    })
}
