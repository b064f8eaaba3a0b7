//! Independent numerical oracles. None of these call the library's
//! eigen-solver or aggregation code.

#![allow(dead_code)]

use ahp_eval::judgment::Saaty;
use ahp_eval::matrix::PairwiseMatrix;

/// Dense matrix rebuilt cell by cell from exact entries.
pub fn dense(m: &PairwiseMatrix) -> Vec<Vec<f64>> {
    let n = m.order();
    (0..n).map(|i| (0..n).map(|j| m.entry(i, j).to_f64()).collect()).collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Perron vector by repeated squaring: normalized row sums of `A^(2^k)`.
pub fn squaring_weights(a: &[Vec<f64>]) -> Vec<f64> {
    let mut p = a.to_vec();
    let mut prev = vec![0.0; a.len()];
    for _ in 0..64 {
        p = matmul(&p, &p);
        let scale: f64 = p.iter().flatten().sum();
        for row in p.iter_mut() {
            for x in row.iter_mut() {
                *x /= scale;
            }
        }
        let rows: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
        let total: f64 = rows.iter().sum();
        let w: Vec<f64> = rows.iter().map(|r| r / total).collect();
        let diff = w.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prev = w;
        if diff < 1e-15 {
            break;
        }
    }
    prev
}

/// Rayleigh-style eigenvalue estimate `mean((A w)_i / w_i)`.
pub fn eigenvalue_for(a: &[Vec<f64>], w: &[f64]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[i][j] * w[j]).sum::<f64>() / w[i])
        .sum::<f64>()
        / n as f64
}

/// Characteristic polynomial coefficients of `det(λI − A)`, highest degree
/// first, by the Faddeev–LeVerrier recurrence.
pub fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &m);
        let c_prev = *coeffs.last().unwrap();
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        m = next;
        let am = matmul(a, &m);
        let trace: f64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

/// Largest real root of the characteristic polynomial, located by a
/// downward scan from the max row sum and refined by bisection.
pub fn char_poly_lambda(a: &[Vec<f64>]) -> f64 {
    let n = a.len() as f64;
    let coeffs = char_poly(a);
    let hi0 = a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let step = 1e-4;
    let mut hi = hi0;
    let mut lo = hi - step;
    while lo > n - 1.0 {
        if horner(&coeffs, lo) <= 0.0 {
            break;
        }
        hi = lo;
        lo -= step;
    }
    if horner(&coeffs, lo) > 0.0 {
        // Even-multiplicity root (consistent matrix) never changes sign.
        return n;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if horner(&coeffs, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn dot(w: &[f64], s: &[f64]) -> f64 {
    w.iter().zip(s).map(|(a, b)| a * b).sum()
}

/// Crossing `δ*` where `Σ w'_i (a_i − b_i) = 0` under proportional
/// renormalization of target `t`; `None` when the gap is constant.
pub fn affine_crossing(w: &[f64], a: &[f64], b: &[f64], t: usize) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let rest: f64 = (0..w.len()).filter(|&i| i != t).map(|i| w[i] * d[i]).sum();
    let g0 = w[t] * d[t] + rest;
    let slope = d[t] - rest / (1.0 - w[t]);
    if slope.abs() < 1e-15 {
        return None;
    }
    Some(-g0 / slope)
}

/// Random upper triangle drawn from the 17-value scale.
pub fn saaty_from_indices(n: usize, idx: &[usize]) -> Vec<((usize, usize), Saaty)> {
    let scale = Saaty::all();
    let mut out = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(((i, j), scale[idx[k] % 17]));
            k += 1;
        }
    }
    out
}
