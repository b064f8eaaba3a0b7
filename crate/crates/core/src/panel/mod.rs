//! Simulated expert-panel elicitation of pairwise judgments.
//!
//! A chat-completion model is asked to act as a panel of domain experts,
//! either in a single prompt covering every role or with one prompt per
//! role. Replies follow a line-oriented contract and are parsed strictly;
//! role judgments are merged by geometric mean and snapped back onto the
//! intensity scale. The consistency gate re-asks only the worst pairs until
//! the ratio is acceptable or the round budget runs out.

mod client;
mod gate;
mod parse;
mod prompt;

pub use client::{
    ChatClient, ChatRequest, ChatResponse, FixtureClient, HttpChatClient, LlmConfig, RecordingClient, ScriptedClient,
    TransportError, Usage,
};
pub use gate::{elicit_with_gate, elicit_with_observer, ElicitationOutcome, PromptExchange, RoundKind, RoundTranscript};
pub use parse::{parse_response, parse_revisions, ParseError};
pub use prompt::{build_prompt, build_refinement_prompt, build_role_prompt, Prompt, OUTPUT_CONTRACT, SCALE_NOTE};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::consistency::DEFAULT_THRESHOLD;
use crate::criteria::CriteriaSet;
use crate::error::AhpError;
use crate::judgment::Saaty;
use crate::matrix::{pair_count, PairwiseMatrix};

/// Refinement rounds re-ask this many worst pairs by default.
pub const DEFAULT_REFINE_TOP_K: usize = 5;
pub const DEFAULT_MAX_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertRole {
    pub id: String,
    pub title: String,
    pub perspective_brief: String,
}

impl ExpertRole {
    pub fn new(id: &str, title: &str, brief: &str) -> Self {
        ExpertRole {
            id: id.to_string(),
            title: title.to_string(),
            perspective_brief: brief.to_string(),
        }
    }
}

/// The four-role panel used for CI cyber range weighting.
pub fn default_roles() -> Vec<ExpertRole> {
    vec![
        ExpertRole::new(
            "cr-architect",
            "CR architect",
            "Designs range infrastructure; weighs emulation fidelity, isolation, and scaling trade-offs.",
        ),
        ExpertRole::new(
            "ics-security-engineer",
            "ICS/SCADA security engineer",
            "Secures industrial control systems; weighs protocol realism and safe containment of live malware.",
        ),
        ExpertRole::new(
            "ci-training-coordinator",
            "CI training coordinator",
            "Runs exercises for operators; weighs learning outcomes, measurement, usability, and access.",
        ),
        ExpertRole::new(
            "ot-operations-manager",
            "OT operations manager",
            "Owns plant operations and budgets; weighs cost, maintainability, and vendor support.",
        ),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElicitationMode {
    /// One prompt simulating the whole panel.
    #[default]
    SingleCall,
    /// One prompt per role, merged by geometric mean.
    MultiCall,
}

impl std::str::FromStr for ElicitationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" | "single-call" => Ok(ElicitationMode::SingleCall),
            "multi" | "multi-call" => Ok(ElicitationMode::MultiCall),
            other => Err(format!("unknown elicitation mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub model: String,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            model: "gpt-4o".to_string(),
            temperature: 0.0,
            max_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationRequest {
    pub criteria_set: CriteriaSet,
    pub roles: Vec<ExpertRole>,
    pub consistency_threshold: f64,
    #[serde(default)]
    pub mode: ElicitationMode,
    pub refine_top_k: usize,
    #[serde(default)]
    pub model: ModelSettings,
}

impl ElicitationRequest {
    /// Default panel, threshold, and model settings for `criteria_set`.
    pub fn new(criteria_set: CriteriaSet) -> Self {
        ElicitationRequest {
            criteria_set,
            roles: default_roles(),
            consistency_threshold: DEFAULT_THRESHOLD,
            mode: ElicitationMode::SingleCall,
            refine_top_k: DEFAULT_REFINE_TOP_K,
            model: ModelSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PanelError> {
        if self.roles.is_empty() {
            return Err(PanelError::InvalidRequest("at least one expert role is required".into()));
        }
        self.criteria_set
            .validate()
            .map_err(|e| PanelError::InvalidRequest(e.to_string()))?;
        if self.refine_top_k == 0 {
            return Err(PanelError::InvalidRequest("refine_top_k must be at least 1".into()));
        }
        if !(self.consistency_threshold.is_finite() && self.consistency_threshold > 0.0) {
            return Err(PanelError::InvalidRequest("consistency threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub model: String,
    pub timestamp: DateTime<Utc>,
    /// SHA-256 of the raw response text.
    pub response_digest: String,
}

/// One upper-triangle judgment. `row` precedes `col` in criteria order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelJudgment {
    pub row: String,
    pub col: String,
    pub value: Saaty,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentSet {
    /// Role id, `"panel"`, or `"consensus"`.
    pub source: String,
    pub criteria: Vec<String>,
    /// Complete upper triangle in row-major order.
    pub judgments: Vec<PanelJudgment>,
    #[serde(default)]
    pub model_metadata: Vec<ModelMetadata>,
}

impl JudgmentSet {
    pub fn to_matrix(&self) -> Result<PairwiseMatrix, AhpError> {
        let idx = |id: &str| self.criteria.iter().position(|c| c == id);
        let mut cells = Vec::with_capacity(self.judgments.len());
        for j in &self.judgments {
            match (idx(&j.row), idx(&j.col)) {
                (Some(r), Some(c)) => cells.push(((r, c), j.value)),
                _ => return Err(AhpError::Malformed(format!("judgment ({}, {}) names an unknown criterion", j.row, j.col))),
            }
        }
        PairwiseMatrix::from_judgments(self.criteria.clone(), &cells)
    }

    pub fn get(&self, row: &str, col: &str) -> Option<&PanelJudgment> {
        self.judgments.iter().find(|j| j.row == row && j.col == col)
    }

    pub fn is_complete(&self) -> bool {
        self.judgments.len() == pair_count(self.criteria.len())
    }
}

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("invalid elicitation request: {0}")]
    InvalidRequest(String),
    #[error("round {round}{}: transport failure: {source}", role_suffix(.role))]
    Transport {
        round: usize,
        role: Option<String>,
        #[source]
        source: TransportError,
    },
    #[error("round {round}{}: {source}", role_suffix(.role))]
    Parse {
        round: usize,
        role: Option<String>,
        #[source]
        source: ParseError,
    },
    #[error("judgment sets do not cover the same pairs: {0}")]
    CoverageMismatch(String),
    #[error(transparent)]
    Ahp(#[from] AhpError),
}

fn role_suffix(role: &Option<String>) -> String {
    role.as_ref().map(|r| format!(" ({r})")).unwrap_or_default()
}

impl PanelError {
    /// Transport failures may succeed on retry; everything else will not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, PanelError::Transport { source, .. } if source.is_retryable())
    }
}

/// SHA-256 hex digest.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Mean of `ln(value)` per pair across sets, before snapping.
///
/// Logs are taken as `ln p − ln q`, so the result for a reciprocal input is
/// the exact negation of the original.
pub fn consensus_log_means(sets: &[JudgmentSet]) -> Result<Vec<f64>, PanelError> {
    let first = sets
        .first()
        .ok_or_else(|| PanelError::CoverageMismatch("no judgment sets".into()))?;
    for s in &sets[1..] {
        if s.criteria != first.criteria {
            return Err(PanelError::CoverageMismatch(format!(
                "`{}` covers {:?}, `{}` covers {:?}",
                first.source, first.criteria, s.source, s.criteria
            )));
        }
        let same_pairs = s.judgments.len() == first.judgments.len()
            && s.judgments.iter().zip(&first.judgments).all(|(a, b)| a.row == b.row && a.col == b.col);
        if !same_pairs {
            return Err(PanelError::CoverageMismatch(format!(
                "`{}` and `{}` judge different pairs",
                first.source, s.source
            )));
        }
    }
    let k = sets.len() as f64;
    Ok((0..first.judgments.len())
        .map(|p| sets.iter().map(|s| s.judgments[p].value.ln()).sum::<f64>() / k)
        .collect())
}

/// Merges role judgment sets into a consensus set.
///
/// Each pair becomes the geometric mean of the role intensities, snapped to
/// the nearest scale value in log space. Rationales are concatenated with
/// their role tags. A single input is returned unchanged apart from its
/// source label.
pub fn aggregate_roles(sets: &[JudgmentSet]) -> Result<JudgmentSet, PanelError> {
    let means = consensus_log_means(sets)?;
    let first = &sets[0];
    if sets.len() == 1 {
        let mut out = first.clone();
        out.source = "consensus".to_string();
        return Ok(out);
    }
    let judgments = first
        .judgments
        .iter()
        .enumerate()
        .map(|(p, j)| PanelJudgment {
            row: j.row.clone(),
            col: j.col.clone(),
            value: Saaty::snap_log(means[p]),
            rationale: sets
                .iter()
                .map(|s| format!("[{}] {}", s.source, s.judgments[p].rationale))
                .collect::<Vec<_>>()
                .join(" | "),
        })
        .collect();
    Ok(JudgmentSet {
        source: "consensus".to_string(),
        criteria: first.criteria.clone(),
        judgments,
        model_metadata: sets.iter().flat_map(|s| s.model_metadata.iter().cloned()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(source: &str, values: &[&str]) -> JudgmentSet {
        let criteria: Vec<String> = (1..=3).map(|i| format!("C{i}")).collect();
        let pairs = [("C1", "C2"), ("C1", "C3"), ("C2", "C3")];
        JudgmentSet {
            source: source.to_string(),
            criteria,
            judgments: pairs
                .iter()
                .zip(values)
                .map(|((r, c), v)| PanelJudgment {
                    row: r.to_string(),
                    col: c.to_string(),
                    value: v.parse().unwrap(),
                    rationale: format!("{source} on {r}/{c}"),
                })
                .collect(),
            model_metadata: vec![],
        }
    }

    #[test]
    fn single_set_is_identity() {
        let a = set("architect", &["3", "5", "1/2"]);
        let c = aggregate_roles(std::slice::from_ref(&a)).unwrap();
        assert_eq!(c.source, "consensus");
        assert_eq!(c.judgments, a.judgments);
    }

    #[test]
    fn equal_values_stay() {
        let c = aggregate_roles(&[set("a", &["3", "3", "3"]), set("b", &["3", "3", "3"])]).unwrap();
        assert!(c.judgments.iter().all(|j| j.value.to_string() == "3"));
        assert!(c.judgments[0].rationale.contains("[a]") && c.judgments[0].rationale.contains("[b]"));
    }

    #[test]
    fn opposite_extremes_cancel() {
        // sqrt(9 * 1/9) = 1
        let means = consensus_log_means(&[set("a", &["9", "1", "1"]), set("b", &["1/9", "1", "1"])]).unwrap();
        assert_eq!(means[0], 0.0);
        let c = aggregate_roles(&[set("a", &["9", "1", "1"]), set("b", &["1/9", "1", "1"])]).unwrap();
        assert_eq!(c.judgments[0].value, Saaty::EQUAL);
    }

    #[test]
    fn mismatched_coverage_rejected() {
        let mut b = set("b", &["3", "3", "3"]);
        b.judgments.pop();
        assert!(matches!(
            aggregate_roles(&[set("a", &["3", "3", "3"]), b]),
            Err(PanelError::CoverageMismatch(_))
        ));
        assert!(matches!(aggregate_roles(&[]), Err(PanelError::CoverageMismatch(_))));
    }

    #[test]
    fn request_validation() {
        let mut r = ElicitationRequest::new(crate::criteria::builtin_ci_criteria());
        assert!(r.validate().is_ok());
        assert_eq!(r.roles.len(), 4);
        r.roles.clear();
        assert!(r.validate().is_err());
    }
}
