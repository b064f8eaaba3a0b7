//! Criteria sets, rubric scores, and weighted aggregation.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weights::WeightVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error("a criteria set needs at least 2 criteria, got {0}")]
    TooFewCriteria(usize),
    #[error("duplicate criterion id `{0}`")]
    DuplicateId(String),
    #[error("criterion `{id}` has an empty anchor for level {level}")]
    EmptyAnchor { id: String, level: u8 },
    #[error("criterion id must be non-empty and free of whitespace and commas: `{0}`")]
    InvalidId(String),
    #[error("score {value} for `{criterion}` is outside 1..=5")]
    InvalidScore { criterion: String, value: i64 },
    #[error("score for `{0}` has no evidence text")]
    MissingEvidence(String),
    #[error("no score for criterion `{0}`")]
    MissingScore(String),
    #[error("score given for unknown criterion `{0}`")]
    UnknownCriterion(String),
    #[error("criterion `{0}` scored more than once")]
    DuplicateScore(String),
    #[error("weights cover {found:?} but the criteria set is {expected:?}")]
    WeightMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("evaluations reference different criteria sets: {0} vs {1}")]
    SetMismatch(String, String),
}

/// Rubric anchor texts for levels 1, 3 and 5. Levels 2 and 4 sit between
/// adjacent anchors and have no text of their own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchors {
    #[serde(rename = "1")]
    pub low: String,
    #[serde(rename = "3")]
    pub mid: String,
    #[serde(rename = "5")]
    pub high: String,
}

impl Anchors {
    pub fn new(low: &str, mid: &str, high: &str) -> Self {
        Anchors {
            low: low.to_string(),
            mid: mid.to_string(),
            high: high.to_string(),
        }
    }

    /// Anchor text for levels 1/3/5, `None` for the in-between levels.
    pub fn text(&self, level: u8) -> Option<&str> {
        match level {
            1 => Some(&self.low),
            3 => Some(&self.mid),
            5 => Some(&self.high),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub description: String,
    pub ci_applicability: String,
    pub indicators: Vec<String>,
    pub anchors: Anchors,
}

/// Name and version of a criteria set, as referenced by evaluations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CriteriaSetRef {
    pub name: String,
    pub version: String,
}

impl std::fmt::Display for CriteriaSetRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}", self.name, self.version)
    }
}

/// Ordered criteria. The order defines matrix and weight indexing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaSet {
    pub name: String,
    pub version: String,
    pub provenance: String,
    pub criteria: Vec<Criterion>,
}

impl CriteriaSet {
    pub fn validate(&self) -> Result<(), CriteriaError> {
        if self.criteria.len() < 2 {
            return Err(CriteriaError::TooFewCriteria(self.criteria.len()));
        }
        let mut seen = HashSet::new();
        for c in &self.criteria {
            if c.id.is_empty() || c.id.contains(|ch: char| ch.is_whitespace() || ch == ',') {
                return Err(CriteriaError::InvalidId(c.id.clone()));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(CriteriaError::DuplicateId(c.id.clone()));
            }
            for level in [1, 3, 5] {
                if c.anchors.text(level).is_none_or(|t| t.trim().is_empty()) {
                    return Err(CriteriaError::EmptyAnchor { id: c.id.clone(), level });
                }
            }
        }
        Ok(())
    }

    pub fn reference(&self) -> CriteriaSetRef {
        CriteriaSetRef {
            name: self.name.clone(),
            version: self.version.clone(),
        }
    }

    pub fn ids(&self) -> Vec<String> {
        self.criteria.iter().map(|c| c.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.criteria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.criteria.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.criteria.iter().position(|c| c.id == id)
    }
}

fn criterion(id: &str, name: &str, description: &str, ci: &str, indicators: &[&str], anchors: [&str; 3]) -> Criterion {
    Criterion {
        id: id.to_string(),
        name: name.to_string(),
        description: description.to_string(),
        ci_applicability: ci.to_string(),
        indicators: indicators.iter().map(|s| s.to_string()).collect(),
        anchors: Anchors::new(anchors[0], anchors[1], anchors[2]),
    }
}

/// The ten cyber-range criteria for critical-infrastructure contexts.
pub fn builtin_ci_criteria() -> CriteriaSet {
    CriteriaSet {
        name: "ci-cyber-range".to_string(),
        version: "1.0".to_string(),
        provenance: "Cyber range evaluation criteria tailored to critical-infrastructure contexts (C1-C10)".to_string(),
        criteria: vec![
            criterion(
                "C1",
                "Realism & Fidelity",
                "Accurate replication of IT/OT stacks, protocols, timing, physics, and artifacts",
                "Critical for CI skill transfer; reproduce ICS/SCADA, protocol semantics, and process effects.",
                &["Supported ICS protocols/devices", "timing accuracy", "HIL/physics simulators", "realistic logs/traffic"],
                ["IT-only, no ICS", "Some ICS protocols/basic simulation", "Rich ICS environment with physics/HIL and authentic artifacts"],
            ),
            criterion(
                "C2",
                "Security & Isolation",
                "Safe containment of malware, tenant isolation, secure access, and auditability",
                "CI scenarios may use sensitive data or real malware; leakage unacceptable",
                &["Network segmentation", "virtualization isolation", "RBAC/ABAC+MFA", "separate red/blue spaces", "logging/reset procedures"],
                ["Weak isolation/shared credentials", "Per-tenant environment + basic authentication", "Hardened containment, full audit, strict operation policies"],
            ),
            criterion(
                "C3",
                "Scalability",
                "Capacity for users/nodes, stability under load, dynamic resource scaling",
                "Sector drills may need hundreds of participants, long simulations",
                &["Max concurrent users/nodes", "clustering/cloud burst", "auto-scaling", "long-duration stability", "QoS"],
                ["Small (<=10 users), unstable", "Medium (~50 users), manual scaling", "Large (>=200 users), smooth elastic scaling"],
            ),
            criterion(
                "C4",
                "Flexibility & Extensibility",
                "Ease of scenario creation and integration of new assets/tools",
                "CI sectors vary; adapt quickly to new devices, threats, and tools",
                &["SDK/APIs", "import custom VM/container images", "vendor-neutral libraries", "external testbed interfacing"],
                ["Closed, fixed templates", "Configurable, limited plugins", "Open APIs, rich libraries, hybrid integrations"],
            ),
            criterion(
                "C5",
                "Maintainability",
                "Effort to patch, update, and manage content",
                "CI systems evolve slowly, threats fast, the CR must be easily updatable.",
                &["Patch/upgrade frequency", "automated pipelines", "infrastructure-as-code", "version control", "OSS vs proprietary"],
                ["Manual, brittle updates", "Semi-automated, regular updates", "Full CI/CD, versioned artifacts, rollback"],
            ),
            criterion(
                "C6",
                "Usability",
                "Learnability and efficiency for instructors/trainees",
                "CI trainees may be OT engineers; must be intuitive and operator-friendly.",
                &["GUI scenario builder", "clear dashboards/HMIs", "instructor controls", "one-click resets", "documentation"],
                ["Steep learning curve, expert-only", "Average usability", "Highly intuitive, efficient management"],
            ),
            criterion(
                "C7",
                "Accessibility",
                "Practical access models (remote, thin client, federated)",
                "CI exercises often cross organization/site boundaries; remote secure access key.",
                &["Web-based access", "VPN/tunneling", "low-bandwidth tolerance", "SSO/federated auth", "multi-tenancy"],
                ["On-site only", "Remote but requires a special client", "Browser/zero-client, robust federated remote access"],
            ),
            criterion(
                "C8",
                "Training Effectiveness & Measurement",
                "Telemetry, scoring, analytics, AAR, skills mapping",
                "CI requires evidence of improved readiness and skill gap analysis",
                &["Built-in scoring engine", "user action logging", "timeline/AAR tools", "skills framework mapping", "reporting"],
                ["Minimal/manual feedback", "Basic scoring + replay", "Rich analytics, dashboards, automated skill tracking"],
            ),
            criterion(
                "C9",
                "Cost & Resource Efficiency",
                "Total cost vs. training value; efficiency of resource use",
                "CI organizations face budget/resource limits; efficient scaling is key",
                &["License model", "hardware/cloud cost", "staff effort", "use of virtual vs physical assets", "node density per host"],
                ["Very high cost, inefficient", "Moderate cost, average efficiency", "Excellent cost efficiency, flexible pricing"],
            ),
            criterion(
                "C10",
                "Vendor Support & Ecosystem",
                "Support, documentation, training, updates, community",
                "Ongoing vendor/community engagement ensures resilience and sector relevance",
                &["SLA", "documentation", "training/certs", "update cadence", "user community", "sector-specific scenarios"],
                ["Minimal support/docs, no ecosystem", "Standard support + some scenarios", "Robust SLAs, rich libraries, active CI community"],
            ),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Normalization {
    #[default]
    #[serde(rename = "raw-1-to-5")]
    Raw,
    #[serde(rename = "min-max-0-to-1")]
    MinMax,
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" | "raw-1-to-5" => Ok(Normalization::Raw),
            "min-max" | "min-max-0-to-1" => Ok(Normalization::MinMax),
            other => Err(format!("unknown normalization `{other}`")),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw-1-to-5",
            Normalization::MinMax => "min-max-0-to-1",
        })
    }
}

pub fn normalize_score(value: i64, mode: Normalization) -> Result<f64, CriteriaError> {
    if !(1..=5).contains(&value) {
        return Err(CriteriaError::InvalidScore {
            criterion: String::new(),
            value,
        });
    }
    Ok(match mode {
        Normalization::Raw => value as f64,
        Normalization::MinMax => (value - 1) as f64 / 4.0,
    })
}

/// One rubric score with its supporting rationale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricScore {
    pub criterion_id: String,
    pub value: u8,
    pub evidence: String,
    #[serde(default)]
    pub evidence_refs: Vec<String>,
}

impl RubricScore {
    pub fn new(criterion_id: &str, value: i64, evidence: &str) -> Result<Self, CriteriaError> {
        let s = RubricScore {
            criterion_id: criterion_id.to_string(),
            value: value.clamp(0, 255) as u8,
            evidence: evidence.to_string(),
            evidence_refs: Vec::new(),
        };
        if !(1..=5).contains(&value) {
            return Err(CriteriaError::InvalidScore {
                criterion: criterion_id.to_string(),
                value,
            });
        }
        s.validate()?;
        Ok(s)
    }

    pub fn with_refs(mut self, refs: Vec<String>) -> Self {
        self.evidence_refs = refs;
        self
    }

    pub fn validate(&self) -> Result<(), CriteriaError> {
        if !(1..=5).contains(&self.value) {
            return Err(CriteriaError::InvalidScore {
                criterion: self.criterion_id.clone(),
                value: self.value as i64,
            });
        }
        if self.evidence.trim().is_empty() {
            return Err(CriteriaError::MissingEvidence(self.criterion_id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub criterion_id: String,
    pub score: u8,
    pub normalized: f64,
    pub weight: f64,
    pub contribution: f64,
}

/// An alternative's scores and its weighted composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub alternative_name: String,
    pub criteria_set: CriteriaSetRef,
    /// One score per criterion, in criteria-set order.
    pub scores: Vec<RubricScore>,
    pub normalization: Normalization,
    pub composite: f64,
    pub profile: Vec<ProfileEntry>,
}

/// Orders `scores` to match `ids`, rejecting gaps, extras and duplicates.
pub fn align_scores(ids: &[String], scores: &[RubricScore]) -> Result<Vec<RubricScore>, CriteriaError> {
    let mut by_id: HashMap<&str, &RubricScore> = HashMap::new();
    for s in scores {
        s.validate()?;
        if !ids.contains(&s.criterion_id) {
            return Err(CriteriaError::UnknownCriterion(s.criterion_id.clone()));
        }
        if by_id.insert(s.criterion_id.as_str(), s).is_some() {
            return Err(CriteriaError::DuplicateScore(s.criterion_id.clone()));
        }
    }
    ids.iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|s| (*s).clone())
                .ok_or_else(|| CriteriaError::MissingScore(id.clone()))
        })
        .collect()
}

/// Weighted sum `Σ w_i · s̃_i` with a per-criterion profile.
pub fn aggregate(
    alternative_name: &str,
    set: &CriteriaSetRef,
    scores: &[RubricScore],
    weights: &WeightVector,
    mode: Normalization,
) -> Result<Evaluation, CriteriaError> {
    let ordered = align_scores(&weights.labels, scores)?;
    let profile: Vec<ProfileEntry> = ordered
        .iter()
        .zip(&weights.weights)
        .map(|(s, &w)| {
            let normalized = normalize_score(s.value as i64, mode).expect("validated score");
            ProfileEntry {
                criterion_id: s.criterion_id.clone(),
                score: s.value,
                normalized,
                weight: w,
                contribution: w * normalized,
            }
        })
        .collect();
    let composite = profile.iter().map(|p| p.contribution).sum();
    Ok(Evaluation {
        alternative_name: alternative_name.to_string(),
        criteria_set: set.clone(),
        scores: ordered,
        normalization: mode,
        composite,
        profile,
    })
}

/// Checks that `weights` are labelled exactly with the set's ids, in order.
pub fn check_weights_match(set: &CriteriaSet, weights: &WeightVector) -> Result<(), CriteriaError> {
    let ids = set.ids();
    if ids != weights.labels {
        return Err(CriteriaError::WeightMismatch {
            expected: ids,
            found: weights.labels.clone(),
        });
    }
    Ok(())
}

/// Aggregates against a full criteria set, checking weight labels first.
pub fn evaluate(
    alternative_name: &str,
    set: &CriteriaSet,
    scores: &[RubricScore],
    weights: &WeightVector,
    mode: Normalization,
) -> Result<Evaluation, CriteriaError> {
    check_weights_match(set, weights)?;
    aggregate(alternative_name, &set.reference(), scores, weights, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub name: String,
    pub values: Vec<f64>,
}

/// Radar-chart data on the raw 1–5 scale, one series per alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartData {
    pub labels: Vec<String>,
    pub radial_min: f64,
    pub radial_max: f64,
    pub series: Vec<ChartSeries>,
}

pub fn profile_chart_data(a: &Evaluation, b: Option<&Evaluation>) -> Result<ChartData, CriteriaError> {
    let evals: Vec<&Evaluation> = std::iter::once(a).chain(b).collect();
    chart_data(&evals)
}

/// Chart data for any number of evaluations over the same criteria set.
pub fn chart_data(evals: &[&Evaluation]) -> Result<ChartData, CriteriaError> {
    let first = evals.first().ok_or(CriteriaError::TooFewCriteria(0))?;
    let labels: Vec<String> = first.scores.iter().map(|s| s.criterion_id.clone()).collect();
    for e in &evals[1..] {
        let ids: Vec<&str> = e.scores.iter().map(|s| s.criterion_id.as_str()).collect();
        if e.criteria_set != first.criteria_set || ids != labels.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(CriteriaError::SetMismatch(first.criteria_set.to_string(), e.criteria_set.to_string()));
        }
    }
    Ok(ChartData {
        labels,
        radial_min: 1.0,
        radial_max: 5.0,
        series: evals
            .iter()
            .map(|e| ChartSeries {
                name: e.alternative_name.clone(),
                values: e.scores.iter().map(|s| s.value as f64).collect(),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::default_labels;

    fn scores(values: &[i64]) -> Vec<RubricScore> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| RubricScore::new(&format!("C{}", i + 1), v, "observed").unwrap())
            .collect()
    }

    #[test]
    fn builtin_set_shape() {
        let set = builtin_ci_criteria();
        set.validate().unwrap();
        assert_eq!(set.ids(), default_labels(10));
        assert_eq!(set.criteria[0].name, "Realism & Fidelity");
        assert!(set.criteria[0].anchors.high.contains("physics/HIL"));
        assert_eq!(set.criteria[8].name, "Cost & Resource Efficiency");
    }

    #[test]
    fn normalization_endpoints() {
        assert_eq!(normalize_score(1, Normalization::MinMax).unwrap(), 0.0);
        assert_eq!(normalize_score(5, Normalization::MinMax).unwrap(), 1.0);
        assert_eq!(normalize_score(3, Normalization::MinMax).unwrap(), 0.5);
        assert_eq!(normalize_score(4, Normalization::Raw).unwrap(), 4.0);
        assert!(normalize_score(0, Normalization::Raw).is_err());
        assert!(normalize_score(6, Normalization::MinMax).is_err());
    }

    #[test]
    fn score_validation() {
        assert!(matches!(RubricScore::new("C1", 6, "x"), Err(CriteriaError::InvalidScore { .. })));
        assert!(matches!(RubricScore::new("C1", 3, "  "), Err(CriteriaError::MissingEvidence(_))));
    }

    #[test]
    fn coverage_errors_name_the_criterion() {
        let w = WeightVector::supplied(default_labels(3), vec![0.5, 0.3, 0.2]).unwrap();
        let set = CriteriaSetRef { name: "t".into(), version: "1".into() };
        let mut s = scores(&[1, 2, 3]);
        s.remove(1);
        let err = aggregate("a", &set, &s, &w, Normalization::Raw).unwrap_err();
        assert_eq!(err, CriteriaError::MissingScore("C2".into()));
        let mut extra = scores(&[1, 2, 3]);
        extra.push(RubricScore::new("C9", 2, "x").unwrap());
        assert_eq!(
            aggregate("a", &set, &extra, &w, Normalization::Raw).unwrap_err(),
            CriteriaError::UnknownCriterion("C9".into())
        );
        let mut dup = scores(&[1, 2, 3]);
        dup.push(RubricScore::new("C1", 2, "x").unwrap());
        assert_eq!(
            aggregate("a", &set, &dup, &w, Normalization::Raw).unwrap_err(),
            CriteriaError::DuplicateScore("C1".into())
        );
    }

    #[test]
    fn constant_scores_give_constant_composite() {
        let w = WeightVector::supplied(default_labels(4), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let set = CriteriaSetRef { name: "t".into(), version: "1".into() };
        for k in 1..=5 {
            let raw = aggregate("a", &set, &scores(&[k; 4]), &w, Normalization::Raw).unwrap();
            assert!((raw.composite - k as f64).abs() < 1e-12);
            let mm = aggregate("a", &set, &scores(&[k; 4]), &w, Normalization::MinMax).unwrap();
            assert!((mm.composite - (k - 1) as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_are_reordered_to_set_order() {
        let w = WeightVector::supplied(default_labels(2), vec![0.75, 0.25]).unwrap();
        let set = CriteriaSetRef { name: "t".into(), version: "1".into() };
        let mut s = scores(&[5, 1]);
        s.reverse();
        let e = aggregate("a", &set, &s, &w, Normalization::Raw).unwrap();
        assert_eq!(e.scores[0].criterion_id, "C1");
        assert!((e.composite - 4.0).abs() < 1e-12);
    }

    #[test]
    fn chart_rejects_mismatched_sets() {
        let w = WeightVector::supplied(default_labels(2), vec![0.5, 0.5]).unwrap();
        let a = aggregate("a", &CriteriaSetRef { name: "x".into(), version: "1".into() }, &scores(&[1, 2]), &w, Normalization::Raw).unwrap();
        let b = aggregate("b", &CriteriaSetRef { name: "x".into(), version: "2".into() }, &scores(&[3, 4]), &w, Normalization::Raw).unwrap();
        assert!(matches!(profile_chart_data(&a, Some(&b)), Err(CriteriaError::SetMismatch(..))));
        let single = profile_chart_data(&a, None).unwrap();
        assert_eq!(single.series.len(), 1);
        assert_eq!(single.series[0].values, vec![1.0, 2.0]);
    }
}
