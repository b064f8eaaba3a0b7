//! Elicitation loop with the consistency gate.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::client::{ChatClient, ChatRequest, Usage};
use super::parse::{parse_response, parse_revisions};
use super::prompt::{build_prompt, build_refinement_prompt, build_role_prompt, Prompt};
use super::{aggregate_roles, digest, ElicitationMode, ElicitationRequest, JudgmentSet, ModelMetadata, PanelError};
use crate::consistency::{consistency, ConsistencyReport, RandomIndexTable};
use crate::matrix::PairwiseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundKind {
    Initial,
    Refinement,
}

/// One request/response pair, stored verbatim for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptExchange {
    /// Role id, or `None` for the whole-panel prompt.
    pub role: Option<String>,
    pub request: ChatRequest,
    pub request_digest: String,
    pub raw_response: String,
    pub response_digest: String,
    #[serde(default)]
    pub usage: Option<Usage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTranscript {
    pub round: usize,
    pub kind: RoundKind,
    pub exchanges: Vec<PromptExchange>,
    /// Judgment sets per role after this round (one set in single-call mode).
    pub role_sets: Vec<JudgmentSet>,
    pub consensus: JudgmentSet,
    pub report: ConsistencyReport,
    /// Pairs re-asked in this round, as `(row, col)` ids.
    #[serde(default)]
    pub revised_pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationOutcome {
    /// Matrix from the best round (lowest consistency ratio).
    pub matrix: PairwiseMatrix,
    pub report: ConsistencyReport,
    pub judgments: JudgmentSet,
    /// Whether the best round passed the gate.
    pub accepted: bool,
    /// 1-based round the result was taken from.
    pub best_round: usize,
    pub rounds: Vec<RoundTranscript>,
}

struct Ctx<'a> {
    req: &'a ElicitationRequest,
    client: &'a dyn ChatClient,
    now: DateTime<Utc>,
}

impl Ctx<'_> {
    fn ask(&self, round: usize, role: Option<&str>, prompt: Prompt) -> Result<(PromptExchange, ModelMetadata), PanelError> {
        let request = ChatRequest {
            model: self.req.model.model.clone(),
            system: prompt.system,
            user: prompt.user,
            temperature: self.req.model.temperature,
            max_tokens: self.req.model.max_tokens,
        };
        let resp = self.client.complete(&request).map_err(|source| PanelError::Transport {
            round,
            role: role.map(str::to_string),
            source,
        })?;
        let response_digest = digest(&resp.text);
        let meta = ModelMetadata {
            model: request.model.clone(),
            timestamp: self.now,
            response_digest: response_digest.clone(),
        };
        let exchange = PromptExchange {
            role: role.map(str::to_string),
            request_digest: request.digest(),
            request,
            raw_response: resp.text,
            response_digest,
            usage: resp.usage,
        };
        Ok((exchange, meta))
    }

    fn assess(&self, consensus: &JudgmentSet) -> Result<(PairwiseMatrix, ConsistencyReport), PanelError> {
        let m = consensus.to_matrix()?;
        let report = consistency(&m, &RandomIndexTable::default(), self.req.consistency_threshold)?;
        Ok((m, report))
    }

    fn initial(&self) -> Result<(RoundTranscript, PairwiseMatrix), PanelError> {
        let set = &self.req.criteria_set;
        let mut exchanges = Vec::new();
        let mut role_sets = Vec::new();
        match self.req.mode {
            ElicitationMode::SingleCall => {
                let (ex, meta) = self.ask(1, None, build_prompt(self.req))?;
                let mut js = parse_response(&ex.raw_response, set).map_err(|source| PanelError::Parse {
                    round: 1,
                    role: None,
                    source,
                })?;
                js.model_metadata.push(meta);
                exchanges.push(ex);
                role_sets.push(js);
            }
            ElicitationMode::MultiCall => {
                for role in &self.req.roles {
                    let (ex, meta) = self.ask(1, Some(&role.id), build_role_prompt(self.req, role))?;
                    let mut js = parse_response(&ex.raw_response, set).map_err(|source| PanelError::Parse {
                        round: 1,
                        role: Some(role.id.clone()),
                        source,
                    })?;
                    js.source = role.id.clone();
                    js.model_metadata.push(meta);
                    exchanges.push(ex);
                    role_sets.push(js);
                }
            }
        }
        let consensus = aggregate_roles(&role_sets)?;
        let (m, report) = self.assess(&consensus)?;
        Ok((
            RoundTranscript {
                round: 1,
                kind: RoundKind::Initial,
                exchanges,
                role_sets,
                consensus,
                report,
                revised_pairs: Vec::new(),
            },
            m,
        ))
    }

    fn refine(&self, round: usize, prev: &RoundTranscript) -> Result<(RoundTranscript, PairwiseMatrix), PanelError> {
        let flagged = prev.report.top(self.req.refine_top_k).to_vec();
        let pairs: Vec<(String, String)> = flagged
            .iter()
            .map(|d| (d.row_label.clone(), d.col_label.clone()))
            .collect();
        let mut exchanges = Vec::new();
        let mut role_sets = prev.role_sets.clone();
        for (k, js) in role_sets.iter_mut().enumerate() {
            let role = match self.req.mode {
                ElicitationMode::SingleCall => None,
                ElicitationMode::MultiCall => Some(&self.req.roles[k]),
            };
            let current = |r: &str, c: &str| js.get(r, c).map(|j| j.value.to_string()).unwrap_or_default();
            let prompt = build_refinement_prompt(self.req, role, &prev.report, &flagged, &current);
            let role_id = role.map(|r| r.id.as_str());
            let (ex, meta) = self.ask(round, role_id, prompt)?;
            let revisions = parse_revisions(&ex.raw_response, &self.req.criteria_set, &pairs).map_err(|source| {
                PanelError::Parse {
                    round,
                    role: role_id.map(str::to_string),
                    source,
                }
            })?;
            for rev in revisions {
                if let Some(slot) = js.judgments.iter_mut().find(|j| j.row == rev.row && j.col == rev.col) {
                    *slot = rev;
                }
            }
            js.model_metadata.push(meta);
            exchanges.push(ex);
        }
        let consensus = aggregate_roles(&role_sets)?;
        let (m, report) = self.assess(&consensus)?;
        Ok((
            RoundTranscript {
                round,
                kind: RoundKind::Refinement,
                exchanges,
                role_sets,
                consensus,
                report,
                revised_pairs: pairs,
            },
            m,
        ))
    }
}

/// Runs elicitation with up to `max_rounds` rounds (the first included).
///
/// Each refinement round re-asks only the `refine_top_k` judgments with the
/// largest deviation from the implied priority ratios; all other pairs stay
/// fixed. When no round passes the gate, the round with the lowest ratio is
/// returned with `accepted = false`. `now` stamps model metadata.
pub fn elicit_with_gate(
    req: &ElicitationRequest,
    client: &dyn ChatClient,
    max_rounds: usize,
    now: DateTime<Utc>,
) -> Result<ElicitationOutcome, PanelError> {
    elicit_with_observer(req, client, max_rounds, now, &mut |_| {})
}

/// Like [`elicit_with_gate`], calling `on_round` after every completed round.
pub fn elicit_with_observer(
    req: &ElicitationRequest,
    client: &dyn ChatClient,
    max_rounds: usize,
    now: DateTime<Utc>,
    on_round: &mut dyn FnMut(&RoundTranscript),
) -> Result<ElicitationOutcome, PanelError> {
    req.validate()?;
    if max_rounds == 0 {
        return Err(PanelError::InvalidRequest("max_rounds must be at least 1".into()));
    }
    let ctx = Ctx { req, client, now };
    let (first, m) = ctx.initial()?;
    on_round(&first);
    let mut matrices = vec![m];
    let mut rounds = vec![first];
    while rounds.len() < max_rounds && !rounds.last().expect("one round").report.acceptable {
        let (next, m) = ctx.refine(rounds.len() + 1, rounds.last().expect("one round"))?;
        on_round(&next);
        matrices.push(m);
        rounds.push(next);
    }
    let best = match rounds.iter().position(|r| r.report.acceptable) {
        Some(k) => k,
        None => rounds
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.report.severity().total_cmp(&b.1.report.severity()))
            .map(|(k, _)| k)
            .expect("one round"),
    };
    let chosen = &rounds[best];
    Ok(ElicitationOutcome {
        matrix: matrices.swap_remove(best),
        report: chosen.report.clone(),
        judgments: chosen.consensus.clone(),
        accepted: chosen.report.acceptable,
        best_round: best + 1,
        rounds,
    })
}
