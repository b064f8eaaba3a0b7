//! One-at-a-time weight sensitivity and rank-reversal detection.
//!
//! A perturbation moves one criterion weight by `δ` and rescales every other
//! weight by `(1 − w_t − δ) / (1 − w_t)`, keeping the vector on the simplex.
//! Composites are affine in `δ` under this rule, so each pairwise gap
//! changes sign at most once per direction and bisection between two grid
//! points that bracket an order change finds the crossing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::{aggregate, CriteriaError, Evaluation};
use crate::weights::WeightVector;

pub const DEFAULT_RANGE: f64 = 0.15;
pub const DEFAULT_STEPS: usize = 61;
/// Composites closer than this are reported as tied.
pub const TIE_TOL: f64 = 1e-12;
/// Width at which crossing bisection stops.
pub const BISECTION_TOL: f64 = 1e-6;
const FEASIBILITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("delta {delta} moves `{criterion}` (weight {weight}) outside [0, 1]")]
    OutOfRange { criterion: String, weight: f64, delta: f64 },
    #[error("`{0}` carries all the weight; there is nothing to redistribute")]
    Degenerate(String),
    #[error("evaluations mix normalization modes")]
    MixedNormalization,
    #[error("sweep range must be positive and finite, got {0}")]
    InvalidRange(f64),
    #[error("sweep needs at least one step")]
    InvalidSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Renormalization {
    /// Remaining weights absorb the change in proportion to their size.
    #[default]
    Proportional,
}

/// Signed offsets to apply to one criterion weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub target_criterion: String,
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub renormalization: Renormalization,
}

/// Shifts `target` by `delta` and rescales the rest proportionally.
pub fn perturb_weights(w: &WeightVector, target: &str, delta: f64) -> Result<WeightVector, SensitivityError> {
    let t = w
        .index_of(target)
        .ok_or_else(|| SensitivityError::UnknownCriterion(target.to_string()))?;
    let wt = w.weights[t];
    let mut new_t = wt + delta;
    if !(-FEASIBILITY_EPS..=1.0 + FEASIBILITY_EPS).contains(&new_t) || !new_t.is_finite() {
        return Err(SensitivityError::OutOfRange {
            criterion: target.to_string(),
            weight: wt,
            delta,
        });
    }
    new_t = new_t.clamp(0.0, 1.0);
    let rest = 1.0 - wt;
    if delta == 0.0 {
        return Ok(w.clone());
    }
    if rest <= FEASIBILITY_EPS {
        return Err(SensitivityError::Degenerate(target.to_string()));
    }
    let scale = (1.0 - new_t) / rest;
    let weights = w
        .weights
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == t { new_t } else { (x * scale).max(0.0) })
        .collect();
    Ok(WeightVector {
        labels: w.labels.clone(),
        weights,
        method: w.method,
    })
}

/// Applies every delta in `spec` in turn.
pub fn perturb_all(w: &WeightVector, spec: &PerturbationSpec) -> Result<Vec<WeightVector>, SensitivityError> {
    spec.deltas.iter().map(|&d| perturb_weights(w, &spec.target_criterion, d)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub name: String,
    pub composite: f64,
    /// 1-based; tied alternatives share a rank.
    pub rank: usize,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn has_ties(&self) -> bool {
        self.entries.iter().any(|e| e.tied)
    }

    pub fn composite(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.composite)
    }
}

fn check_compatible(evals: &[Evaluation]) -> Result<(), SensitivityError> {
    if let Some(first) = evals.first() {
        for e in &evals[1..] {
            if e.criteria_set != first.criteria_set {
                return Err(CriteriaError::SetMismatch(first.criteria_set.to_string(), e.criteria_set.to_string()).into());
            }
            if e.normalization != first.normalization {
                return Err(SensitivityError::MixedNormalization);
            }
        }
    }
    Ok(())
}

fn rank_unchecked(evals: &[Evaluation], w: &WeightVector) -> Result<Ranking, SensitivityError> {
    let scored: Vec<(String, f64)> = evals
        .iter()
        .map(|e| {
            aggregate(&e.alternative_name, &e.criteria_set, &e.scores, w, e.normalization)
                .map(|r| (e.alternative_name.clone(), r.composite))
        })
        .collect::<Result<_, _>>()?;
    Ok(rank_scored(scored))
}

/// Ranks evaluations by the composites they already carry.
pub fn rank_evaluations(evals: &[Evaluation]) -> Ranking {
    rank_scored(evals.iter().map(|e| (e.alternative_name.clone(), e.composite)).collect())
}

fn rank_scored(mut scored: Vec<(String, f64)>) -> Ranking {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut entries = Vec::with_capacity(scored.len());
    let mut start = 0;
    while start < scored.len() {
        let mut end = start + 1;
        while end < scored.len() && (scored[end - 1].1 - scored[end].1).abs() <= TIE_TOL {
            end += 1;
        }
        let group = &mut scored[start..end];
        group.sort_by(|a, b| a.0.cmp(&b.0));
        let tied = group.len() > 1;
        for (name, composite) in group.iter() {
            entries.push(RankEntry {
                name: name.clone(),
                composite: *composite,
                rank: start + 1,
                tied,
            });
        }
        start = end;
    }
    Ranking { entries }
}

/// Sorts alternatives by descending composite recomputed under `w`.
/// Ties are ordered by name and flagged.
pub fn rank_alternatives(evals: &[Evaluation], w: &WeightVector) -> Result<Ranking, SensitivityError> {
    check_compatible(evals)?;
    rank_unchecked(evals, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub ranking: Ranking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSweep {
    pub criterion: String,
    pub base_weight: f64,
    /// Ascending in `delta`; always contains `delta = 0`.
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalEvent {
    pub criterion: String,
    /// Bisected crossing point.
    pub delta: f64,
    /// First grid point on which the new order was observed.
    pub grid_delta: f64,
    /// `(ahead, behind)` just before the crossing; the two swap after it.
    pub swapped: (String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criticality {
    pub criterion: String,
    /// Smallest `|δ|` producing any rank change; `None` when no change
    /// occurs within the swept range.
    pub min_abs_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub range: f64,
    pub steps: usize,
    pub baseline: Ranking,
    pub sweeps: Vec<CriterionSweep>,
    pub reversal_events: Vec<ReversalEvent>,
    pub criticality: Vec<Criticality>,
}

impl SensitivityReport {
    pub fn criticality_of(&self, criterion: &str) -> Option<f64> {
        self.criticality
            .iter()
            .find(|c| c.criterion == criterion)
            .and_then(|c| c.min_abs_delta)
    }
}

/// Grid of `steps` evenly spaced offsets over `[-range, range]`, clamped to
/// keep `base + δ` in `[0, 1]`. A single step means `δ = 0` only.
pub fn sweep_grid(base: f64, range: f64, steps: usize) -> Vec<f64> {
    let raw: Vec<f64> = if steps == 1 {
        vec![0.0]
    } else {
        let h = 2.0 * range / (steps - 1) as f64;
        (0..steps).map(|k| -range + k as f64 * h).collect()
    };
    let mut grid: Vec<f64> = raw
        .into_iter()
        .map(|d| if d.abs() < 1e-15 { 0.0 } else { d.clamp(-base, 1.0 - base) })
        .chain(std::iter::once(0.0))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    grid
}

fn order_at(evals: &[Evaluation], w: &WeightVector, target: &str, delta: f64) -> Result<Vec<String>, SensitivityError> {
    let pw = perturb_weights(w, target, delta)?;
    Ok(rank_unchecked(evals, &pw)?.order().into_iter().map(str::to_string).collect())
}

/// Narrows `[inner, outer]` to the point where the order stops matching
/// `inner_order`.
fn bisect_crossing(
    evals: &[Evaluation],
    w: &WeightVector,
    target: &str,
    mut inner: f64,
    mut outer: f64,
    inner_order: &[String],
) -> Result<f64, SensitivityError> {
    while (outer - inner).abs() > BISECTION_TOL {
        let mid = 0.5 * (inner + outer);
        if order_at(evals, w, target, mid)? == inner_order {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    Ok(0.5 * (inner + outer))
}

/// Pairs ordered `(a, b)` in `before` that appear as `(b, a)` in `after`.
fn swapped_pairs(before: &[String], after: &[String]) -> Vec<(String, String)> {
    let pos = |name: &String| after.iter().position(|n| n == name).unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for i in 0..before.len() {
        for j in (i + 1)..before.len() {
            if pos(&before[i]) > pos(&before[j]) {
                out.push((before[i].clone(), before[j].clone()));
            }
        }
    }
    out
}

pub fn analyze(evals: &[Evaluation], w: &WeightVector, range: f64, steps: usize) -> Result<SensitivityReport, SensitivityError> {
    if !(range.is_finite() && range > 0.0) {
        return Err(SensitivityError::InvalidRange(range));
    }
    if steps == 0 {
        return Err(SensitivityError::InvalidSteps);
    }
    check_compatible(evals)?;
    let baseline = rank_unchecked(evals, w)?;

    let mut sweeps = Vec::with_capacity(w.len());
    let mut events = Vec::new();
    let mut criticality = Vec::with_capacity(w.len());

    for (idx, label) in w.labels.iter().enumerate() {
        let base = w.weights[idx];
        let grid = sweep_grid(base, range, steps);
        let mut points = Vec::with_capacity(grid.len());
        for &d in &grid {
            let ranking = if d == 0.0 {
                baseline.clone()
            } else {
                rank_unchecked(evals, &perturb_weights(w, label, d)?)?
            };
            points.push(SweepPoint { delta: d, ranking });
        }

        let zero = points.iter().position(|p| p.delta == 0.0).expect("grid contains zero");
        let mut crit: Option<f64> = None;
        let walks: [Vec<usize>; 2] = [(zero + 1..points.len()).collect(), (0..zero).rev().collect()];
        for walk in walks {
            let mut prev_delta = 0.0;
            let mut prev_order: Vec<String> = baseline.order().into_iter().map(str::to_string).collect();
            for k in walk {
                let order: Vec<String> = points[k].ranking.order().into_iter().map(str::to_string).collect();
                if order != prev_order {
                    let crossing = bisect_crossing(evals, w, label, prev_delta, points[k].delta, &prev_order)?;
                    let after = order_at(evals, w, label, points[k].delta)?;
                    for swapped in swapped_pairs(&prev_order, &after) {
                        events.push(ReversalEvent {
                            criterion: label.clone(),
                            delta: crossing,
                            grid_delta: points[k].delta,
                            swapped,
                        });
                    }
                    if crit.is_none_or(|c| crossing.abs() < c) {
                        crit = Some(crossing.abs());
                    }
                }
                prev_delta = points[k].delta;
                prev_order = order;
            }
        }
        criticality.push(Criticality {
            criterion: label.clone(),
            min_abs_delta: crit,
        });
        sweeps.push(CriterionSweep {
            criterion: label.clone(),
            base_weight: base,
            points,
        });
    }

    Ok(SensitivityReport {
        range,
        steps,
        baseline,
        sweeps,
        reversal_events: events,
        criticality,
    })
}
