//! Project persistence and report export.
//!
//! A project is one JSON document with `schema_version` at the root. Matrix
//! entries are stored as `"p/q"` strings, so saving and loading is exact.
//! Files are written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::consistency::{consistency, ConsistencyReport, RandomIndexTable};
use crate::criteria::{chart_data, evaluate, CriteriaError, CriteriaSet, CriteriaSetRef, Evaluation, Normalization, RubricScore};
use crate::error::AhpError;
use crate::judgment::Saaty;
use crate::matrix::{pair_count, PairwiseMatrix};
use crate::panel::{ElicitationOutcome, ElicitationRequest, RoundTranscript};
use crate::sensitivity::{rank_evaluations, SensitivityReport};
use crate::weights::{derive_weights, WeightMethod, WeightVector};

pub const SCHEMA_VERSION: u32 = 2;

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema version {found} is newer than the supported version {SCHEMA_VERSION}")]
    UnsupportedVersion { found: u64 },
    #[error("project document has no schema_version")]
    MissingVersion,
    #[error("referential integrity: {0}")]
    Integrity(String),
    #[error("incomplete project: {0}")]
    Incomplete(String),
    #[error("consistency gate: CoR {cor:.4} exceeds {threshold:.2}; pass an explicit override to use these weights")]
    GateRejected { cor: f64, threshold: f64 },
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Ahp(#[from] AhpError),
}

/// Pipeline stage of a project, in workflow order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    #[default]
    DefiningCriteria,
    Comparing,
    WeightsReady,
    Scoring,
    Complete,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::DefiningCriteria => "defining-criteria",
            Stage::Comparing => "comparing",
            Stage::WeightsReady => "weights-ready",
            Stage::Scoring => "scoring",
            Stage::Complete => "complete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMetadata {
    pub name: String,
    pub created: DateTime<Utc>,
    pub modified: DateTime<Utc>,
    #[serde(default)]
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Manual,
    Panel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredMatrix {
    pub matrix: PairwiseMatrix,
    pub report: ConsistencyReport,
    pub origin: Origin,
}

/// A judgment entered by hand, oriented so `row` precedes `col` in criteria order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftJudgment {
    pub row: String,
    pub col: String,
    pub value: Saaty,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveWeights {
    pub weights: WeightVector,
    /// Index into `matrices`.
    pub source_matrix: Option<usize>,
    /// Set when the weights are in use despite a failed or missing gate.
    pub override_unverified: bool,
}

impl ActiveWeights {
    pub fn is_verified(&self) -> bool {
        !self.override_unverified
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSheet {
    pub alternative: String,
    pub normalization: Normalization,
    pub scores: Vec<RubricScore>,
}

/// Full record of one panel elicitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRun {
    pub id: String,
    pub created: DateTime<Utc>,
    pub request: ElicitationRequest,
    pub rounds: Vec<RoundTranscript>,
    pub accepted: bool,
    pub best_round: usize,
    /// Index into `matrices` once the result has been adopted.
    #[serde(default)]
    pub matrix_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub schema_version: u32,
    pub metadata: ProjectMetadata,
    pub criteria_set: CriteriaSet,
    /// Earlier criteria sets still referenced by evaluations.
    #[serde(default)]
    pub criteria_history: Vec<CriteriaSet>,
    #[serde(default)]
    pub draft: Vec<DraftJudgment>,
    #[serde(default)]
    pub matrices: Vec<StoredMatrix>,
    #[serde(default)]
    pub active_weights: Option<ActiveWeights>,
    #[serde(default)]
    pub score_sheets: Vec<ScoreSheet>,
    #[serde(default)]
    pub evaluations: Vec<Evaluation>,
    #[serde(default)]
    pub sensitivity_reports: Vec<SensitivityReport>,
    #[serde(default)]
    pub transcripts: Vec<PanelRun>,
}

impl Project {
    pub fn new(name: &str, criteria_set: CriteriaSet, now: DateTime<Utc>) -> Self {
        Project {
            schema_version: SCHEMA_VERSION,
            metadata: ProjectMetadata {
                name: name.to_string(),
                created: now,
                modified: now,
                stage: Stage::DefiningCriteria,
                session: None,
            },
            criteria_set,
            criteria_history: Vec::new(),
            draft: Vec::new(),
            matrices: Vec::new(),
            active_weights: None,
            score_sheets: Vec::new(),
            evaluations: Vec::new(),
            sensitivity_reports: Vec::new(),
            transcripts: Vec::new(),
        }
    }

    pub fn touch(&mut self, now: DateTime<Utc>) {
        self.metadata.modified = now;
    }

    /// Replaces the criteria set. Everything derived from the old set is
    /// dropped except matrices and transcripts, which stay as history.
    pub fn replace_criteria(&mut self, set: CriteriaSet) -> Result<(), StorageError> {
        set.validate()?;
        let old = std::mem::replace(&mut self.criteria_set, set);
        if old.reference() != self.criteria_set.reference() && !self.criteria_history.contains(&old) {
            self.criteria_history.push(old);
        }
        self.draft.clear();
        self.active_weights = None;
        self.score_sheets.clear();
        self.evaluations.clear();
        self.sensitivity_reports.clear();
        Ok(())
    }

    fn criterion_index(&self, id: &str) -> Result<usize, StorageError> {
        self.criteria_set
            .index_of(id)
            .ok_or_else(|| CriteriaError::UnknownCriterion(id.to_string()).into())
    }

    /// Records one judgment, reorienting it to criteria order. Returns
    /// `false` when the same value was already stored.
    pub fn put_judgment(&mut self, a: &str, b: &str, value: Saaty, rationale: Option<String>) -> Result<bool, StorageError> {
        let (i, j) = (self.criterion_index(a)?, self.criterion_index(b)?);
        if i == j {
            return Err(AhpError::Malformed(format!("`{a}` cannot be compared with itself")).into());
        }
        let (row, col, value) = if i < j { (i, j, value) } else { (j, i, value.recip()) };
        let (row, col) = (self.criteria_set.criteria[row].id.clone(), self.criteria_set.criteria[col].id.clone());
        let entry = DraftJudgment { row, col, value, rationale };
        match self.draft.iter_mut().find(|d| d.row == entry.row && d.col == entry.col) {
            Some(existing) if *existing == entry => Ok(false),
            Some(existing) => {
                *existing = entry;
                Ok(true)
            }
            None => {
                self.draft.push(entry);
                Ok(true)
            }
        }
    }

    /// `(entered, required)` judgment counts.
    pub fn completeness(&self) -> (usize, usize) {
        (self.draft.len(), pair_count(self.criteria_set.len()))
    }

    /// Matrix from the draft judgments; fails naming any missing pair.
    pub fn draft_matrix(&self) -> Result<PairwiseMatrix, StorageError> {
        let mut cells = Vec::with_capacity(self.draft.len());
        for d in &self.draft {
            cells.push(((self.criterion_index(&d.row)?, self.criterion_index(&d.col)?), d.value));
        }
        Ok(PairwiseMatrix::from_judgments(self.criteria_set.ids(), &cells)?)
    }

    pub fn add_matrix(&mut self, matrix: PairwiseMatrix, threshold: f64, origin: Origin) -> Result<usize, StorageError> {
        let report = consistency(&matrix, &RandomIndexTable::default(), threshold)?;
        self.matrices.push(StoredMatrix { matrix, report, origin });
        Ok(self.matrices.len() - 1)
    }

    /// Derives weights from a stored matrix and makes them active. A
    /// matrix that fails the gate is only accepted with `allow_unverified`,
    /// and the weights are then flagged.
    pub fn activate_weights(&mut self, matrix: usize, method: WeightMethod, allow_unverified: bool) -> Result<&ActiveWeights, StorageError> {
        let stored = self
            .matrices
            .get(matrix)
            .ok_or_else(|| StorageError::Integrity(format!("no matrix at index {matrix}")))?;
        if stored.matrix.labels() != self.criteria_set.ids().as_slice() {
            return Err(StorageError::Integrity("matrix labels do not match the criteria set".into()));
        }
        if !stored.report.acceptable && !allow_unverified {
            return Err(StorageError::GateRejected {
                cor: stored.report.severity(),
                threshold: stored.report.threshold,
            });
        }
        let weights = derive_weights(&stored.matrix, method)?;
        let override_unverified = !stored.report.acceptable;
        self.evaluations.clear();
        self.sensitivity_reports.clear();
        Ok(self.active_weights.insert(ActiveWeights {
            weights,
            source_matrix: Some(matrix),
            override_unverified,
        }))
    }

    /// Inserts or replaces an alternative's scores after validating them.
    pub fn set_scores(&mut self, alternative: &str, scores: Vec<RubricScore>, normalization: Normalization) -> Result<(), StorageError> {
        let ordered = crate::criteria::align_scores(&self.criteria_set.ids(), &scores)?;
        let sheet = ScoreSheet {
            alternative: alternative.to_string(),
            normalization,
            scores: ordered,
        };
        match self.score_sheets.iter_mut().find(|s| s.alternative == alternative) {
            Some(s) => *s = sheet,
            None => self.score_sheets.push(sheet),
        }
        Ok(())
    }

    /// Recomputes every evaluation under the active weights.
    pub fn aggregate_all(&mut self) -> Result<&[Evaluation], StorageError> {
        let weights = &self
            .active_weights
            .as_ref()
            .ok_or_else(|| StorageError::Incomplete("no active weights".into()))?
            .weights;
        if self.score_sheets.is_empty() {
            return Err(StorageError::Incomplete("no alternatives have been scored".into()));
        }
        self.evaluations = self
            .score_sheets
            .iter()
            .map(|s| evaluate(&s.alternative, &self.criteria_set, &s.scores, weights, s.normalization))
            .collect::<Result<_, _>>()?;
        Ok(&self.evaluations)
    }

    /// Stores a panel run; the result matrix is added when `adopt` is set.
    pub fn record_panel_run(&mut self, id: &str, request: ElicitationRequest, outcome: ElicitationOutcome, now: DateTime<Utc>, adopt: bool) -> usize {
        let matrix_index = adopt.then(|| {
            self.matrices.push(StoredMatrix {
                matrix: outcome.matrix.clone(),
                report: outcome.report.clone(),
                origin: Origin::Panel,
            });
            self.matrices.len() - 1
        });
        self.transcripts.push(PanelRun {
            id: id.to_string(),
            created: now,
            request,
            rounds: outcome.rounds,
            accepted: outcome.accepted,
            best_round: outcome.best_round,
            matrix_index,
        });
        self.transcripts.len() - 1
    }

    /// Checks cross-references inside the document.
    pub fn validate(&self) -> Result<(), StorageError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(StorageError::Integrity(format!("schema_version {} in memory", self.schema_version)));
        }
        self.criteria_set.validate()?;
        let known: Vec<CriteriaSetRef> = std::iter::once(&self.criteria_set)
            .chain(&self.criteria_history)
            .map(CriteriaSet::reference)
            .collect();
        for e in &self.evaluations {
            if !known.contains(&e.criteria_set) {
                return Err(StorageError::Integrity(format!(
                    "evaluation `{}` references unknown criteria set {}",
                    e.alternative_name, e.criteria_set
                )));
            }
        }
        for d in &self.draft {
            for id in [&d.row, &d.col] {
                if self.criteria_set.index_of(id).is_none() {
                    return Err(StorageError::Integrity(format!("draft judgment names unknown criterion `{id}`")));
                }
            }
        }
        if let Some(aw) = &self.active_weights {
            if aw.weights.labels != self.criteria_set.ids() {
                return Err(StorageError::Integrity("active weights do not match the criteria set".into()));
            }
            match aw.source_matrix {
                Some(k) => {
                    let m = self
                        .matrices
                        .get(k)
                        .ok_or_else(|| StorageError::Integrity(format!("active weights cite missing matrix {k}")))?;
                    if !m.report.acceptable && !aw.override_unverified {
                        return Err(StorageError::Integrity(
                            "active weights come from an inconsistent matrix without an override flag".into(),
                        ));
                    }
                }
                None if !aw.override_unverified => {
                    return Err(StorageError::Integrity("active weights have no source matrix and no override flag".into()));
                }
                None => {}
            }
        }
        for t in &self.transcripts {
            if let Some(k) = t.matrix_index {
                if k >= self.matrices.len() {
                    return Err(StorageError::Integrity(format!("transcript `{}` cites missing matrix {k}", t.id)));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("project serializes");
        s.push('\n');
        s
    }

    /// Parses a project document, migrating older schema versions.
    pub fn from_json(text: &str) -> Result<Project, StorageError> {
        let value: Value = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        let value = migrate(value)?;
        let project: Project = serde_json::from_value(value).map_err(|e| StorageError::Parse {
            offset: 0,
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        project.validate()?;
        Ok(project)
    }
}

fn parse_error(text: &str, e: &serde_json::Error) -> StorageError {
    let (line, column) = (e.line(), e.column());
    let offset = if line == 0 {
        0
    } else {
        let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
        (start + column.saturating_sub(1)).min(text.len())
    };
    StorageError::Parse {
        offset,
        line,
        column,
        message: e.to_string(),
    }
}

/// Brings an older document up to [`SCHEMA_VERSION`].
///
/// Version 1 kept a bare `weights` vector at the root with no record of
/// where it came from. It becomes `active_weights`, attributed to the last
/// stored matrix and flagged unverified when that matrix failed its gate.
fn migrate(mut v: Value) -> Result<Value, StorageError> {
    let version = v
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or(StorageError::MissingVersion)?;
    if version > SCHEMA_VERSION as u64 {
        return Err(StorageError::UnsupportedVersion { found: version });
    }
    if version == 1 {
        let obj = v
            .as_object_mut()
            .ok_or_else(|| StorageError::Integrity("document root is not an object".into()))?;
        let weights = obj.remove("weights").filter(|w| !w.is_null());
        let last = obj
            .get("matrices")
            .and_then(Value::as_array)
            .and_then(|m| m.len().checked_sub(1).map(|k| (k, m[k]["report"]["acceptable"].as_bool().unwrap_or(false))));
        if let Some(w) = weights {
            let (source, acceptable) = match last {
                Some((k, ok)) => (Value::from(k), ok),
                None => (Value::Null, false),
            };
            obj.insert(
                "active_weights".into(),
                serde_json::json!({"weights": w, "source_matrix": source, "override_unverified": !acceptable}),
            );
        }
        obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        log::info!("migrated project from schema version 1 to {SCHEMA_VERSION}");
    }
    Ok(v)
}

/// Writes `p` atomically to `path`.
pub fn save(p: &Project, path: &Path) -> Result<(), StorageError> {
    p.validate()?;
    let io = |source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(p.to_json().as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Project, StorageError> {
    let text = std::fs::read_to_string(path).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Project::from_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    #[default]
    Summary,
    Full,
}

impl std::str::FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "summary" => Ok(ReportKind::Summary),
            "full" => Ok(ReportKind::Full),
            other => Err(format!("unknown report kind `{other}` (expected summary or full)")),
        }
    }
}

/// Fixed-precision number with negative zero shown as zero.
fn num(v: f64, places: usize) -> String {
    let s = format!("{v:.places$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn cell(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace('|', "/")
}

/// Renders a plain-text report. Output depends only on the project, so
/// identical projects give identical bytes.
pub fn export_report(p: &Project, kind: ReportKind) -> Result<String, StorageError> {
    let aw = p
        .active_weights
        .as_ref()
        .ok_or_else(|| StorageError::Incomplete("no active weights".into()))?;
    if p.evaluations.is_empty() {
        return Err(StorageError::Incomplete("no evaluations; run aggregate first".into()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "# Evaluation report: {}\n", p.metadata.name);
    let _ = writeln!(out, "Criteria set: {}", p.criteria_set.reference());
    let _ = writeln!(out, "Weight method: {}", aw.weights.method);
    if aw.override_unverified {
        out.push_str("Weights: UNVERIFIED (consistency gate overridden)\n");
    } else {
        out.push_str("Weights: verified\n");
    }
    out.push_str("\n## Composite scores\n\n| Rank | Alternative | Composite | Normalization |\n|---|---|---|---|\n");
    let ranking = rank_evaluations(&p.evaluations);
    for e in &ranking.entries {
        let ev = p.evaluations.iter().find(|x| x.alternative_name == e.name).expect("ranked from evaluations");
        let _ = writeln!(
            out,
            "| {}{} | {} | {} | {} |",
            e.rank,
            if e.tied { " (tie)" } else { "" },
            cell(&e.name),
            num(e.composite, 3),
            ev.normalization
        );
    }
    out.push_str("\n## Ranking\n\n");
    let order: Vec<String> = ranking.entries.iter().map(|e| e.name.clone()).collect();
    let _ = writeln!(out, "{}", order.join(" > "));

    if kind == ReportKind::Summary {
        return Ok(out);
    }

    out.push_str("\n## Weights\n\n| ID | Criterion | Weight |\n|---|---|---|\n");
    for (id, w) in aw.weights.iter() {
        let name = p.criteria_set.get(id).map(|c| c.name.as_str()).unwrap_or("");
        let _ = writeln!(out, "| {id} | {} | {} |", cell(name), num(w, 4));
    }

    if let Some(stored) = aw.source_matrix.and_then(|k| p.matrices.get(k)) {
        let m = &stored.matrix;
        let _ = writeln!(out, "\n## Pairwise matrix ({:?} origin)\n", stored.origin);
        let labels = m.labels();
        let _ = writeln!(out, "| | {} |", labels.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(labels.len()));
        for (i, l) in labels.iter().enumerate() {
            let row: Vec<String> = (0..labels.len()).map(|j| m.entry(i, j).to_string()).collect();
            let _ = writeln!(out, "| {l} | {} |", row.join(" | "));
        }
        let r = &stored.report;
        out.push_str("\n## Consistency\n\n");
        let _ = writeln!(out, "lambda_max: {}", num(r.lambda_max, 4));
        let _ = writeln!(out, "CoI: {}", num(r.coi, 4));
        let _ = writeln!(out, "RoI: {}", num(r.roi, 2));
        match r.cor {
            Some(c) => {
                let _ = writeln!(out, "CoR: {} ({})", num(c, 3), num(c, 5));
            }
            None => out.push_str("CoR: undefined (RoI is zero)\n"),
        }
        let _ = writeln!(
            out,
            "Gate: {} (threshold {})",
            if r.acceptable { "acceptable" } else { "not acceptable" },
            num(r.threshold, 2)
        );
        out.push_str("\nWorst judgments:\n\n| Pair | Value | Implied | ln deviation |\n|---|---|---|---|\n");
        for d in r.top(10) {
            let _ = writeln!(
                out,
                "| {}, {} | {} | {} | {} |",
                d.row_label,
                d.col_label,
                d.value,
                num(d.implied, 3),
                num(d.deviation, 4)
            );
        }
    }

    out.push_str("\n## Criterion profiles\n");
    for e in &p.evaluations {
        let _ = writeln!(out, "\n### {}\n", e.alternative_name);
        out.push_str("| ID | Score | Normalized | Weight | Contribution | Evidence | Refs |\n|---|---|---|---|---|---|---|\n");
        for (pe, s) in e.profile.iter().zip(&e.scores) {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} |",
                pe.criterion_id,
                pe.score,
                num(pe.normalized, 2),
                num(pe.weight, 4),
                num(pe.contribution, 4),
                cell(&s.evidence),
                cell(&s.evidence_refs.join("; "))
            );
        }
        let _ = writeln!(out, "\nComposite: {}", num(e.composite, 3));
    }

    if let Some(sr) = p.sensitivity_reports.last() {
        let _ = writeln!(
            out,
            "\n## Sensitivity (range ±{}, {} steps)\n",
            num(sr.range, 3),
            sr.steps
        );
        out.push_str("| Criterion | Min |delta| for a rank change |\n|---|---|\n");
        for c in &sr.criticality {
            let v = c.min_abs_delta.map(|d| num(d, 4)).unwrap_or_else(|| "none within range".into());
            let _ = writeln!(out, "| {} | {v} |", c.criterion);
        }
        if sr.reversal_events.is_empty() {
            out.push_str("\nNo rank reversals within range.\n");
        } else {
            out.push_str("\nReversal events:\n\n");
            for ev in &sr.reversal_events {
                let _ = writeln!(
                    out,
                    "- {} at delta {}: {} and {} swap",
                    ev.criterion,
                    num(ev.delta, 4),
                    ev.swapped.0,
                    ev.swapped.1
                );
            }
        }
    }

    let adopted: Vec<&PanelRun> = p
        .transcripts
        .iter()
        .filter(|t| t.matrix_index.is_some() && t.matrix_index == aw.source_matrix)
        .collect();
    for run in adopted {
        let round = &run.rounds[run.best_round - 1];
        let _ = writeln!(out, "\n## Panel rationales (run {}, round {})\n", run.id, run.best_round);
        for j in &round.consensus.judgments {
            let _ = writeln!(out, "- {}, {} = {}: {}", j.row, j.col, j.value, j.rationale);
        }
    }

    let evals: Vec<&Evaluation> = p.evaluations.iter().collect();
    let chart = chart_data(&evals)?;
    out.push_str("\n## Chart data\n\n```json\n");
    out.push_str(&serde_json::to_string_pretty(&chart).expect("chart serializes"));
    out.push_str("\n```\n");
    Ok(out)
}
