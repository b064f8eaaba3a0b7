//! Endpoint handlers. Every session response carries `session_id`,
//! `revision`, and `state`, and the revision is echoed in an `ETag` header.

use ahp_eval::consistency::{consistency, ConsistencyReport, RandomIndexTable};
use ahp_eval::criteria::{builtin_ci_criteria, chart_data, CriteriaSet, Evaluation, Normalization, RubricScore};
use ahp_eval::judgment::Saaty;
use ahp_eval::panel::{elicit_with_observer, ElicitationMode, ElicitationRequest, ExpertRole, ModelSettings};
use ahp_eval::sensitivity::{analyze, rank_evaluations, DEFAULT_RANGE, DEFAULT_STEPS};
use ahp_eval::storage::{export_report, ActiveWeights, Origin, Project, ReportKind, SessionMeta, Stage, StorageError};
use ahp_eval::weights::{WeightMethod, WeightVector};
use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, OptionalFromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{criteria_error, ApiError};
use crate::state::{revision_of, AppState, Job, JobStatus};

/// JSON body extractor whose failures use the service error format.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match <Json<T> as FromRequest<S>>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(JsonRejection::JsonDataError(e)) => Err(ApiError::invalid("body", e.body_text())),
            Err(e) => Err(ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e.body_text())),
        }
    }
}

impl<S: Send + Sync, T: DeserializeOwned> OptionalFromRequest<S> for Body<T> {
    type Rejection = ApiError;

    /// An absent body (no content type, or zero length) is `None`.
    async fn from_request(req: Request, state: &S) -> Result<Option<Self>, Self::Rejection> {
        let headers = req.headers();
        let empty_len = headers
            .get(header::CONTENT_LENGTH)
            .and_then(|v| v.to_str().ok())
            .is_some_and(|v| v.trim() == "0");
        if !headers.contains_key(header::CONTENT_TYPE) || empty_len {
            return Ok(None);
        }
        <Self as FromRequest<S>>::from_request(req, state).await.map(Some)
    }
}

fn envelope(id: &str, revision: u64, stage: Stage, payload: impl Serialize) -> Response {
    let mut body = match serde_json::to_value(payload).expect("payload serializes") {
        Value::Object(m) => m,
        Value::Null => serde_json::Map::new(),
        other => {
            let mut m = serde_json::Map::new();
            m.insert("data".into(), other);
            m
        }
    };
    body.insert("session_id".into(), json!(id));
    body.insert("revision".into(), json!(revision));
    body.insert("state".into(), json!(stage));
    let mut resp = Json(Value::Object(body)).into_response();
    if let Ok(v) = HeaderValue::from_str(&format!("\"{revision}\"")) {
        resp.headers_mut().insert(header::ETAG, v);
    }
    resp
}

fn require_stage(p: &Project, allowed: &[Stage], action: &str) -> Result<(), ApiError> {
    if allowed.contains(&p.metadata.stage) {
        Ok(())
    } else {
        let names: Vec<String> = allowed.iter().map(Stage::to_string).collect();
        Err(ApiError::conflict(
            "invalid-state",
            format!("cannot {action} in state {}; allowed in {}", p.metadata.stage, names.join(", ")),
        ))
    }
}

/// Weights payload. `unverified` is always present so a client can never
/// mistake overridden weights for gated ones.
#[derive(Serialize)]
struct WeightsPayload<'a> {
    weights: &'a WeightVector,
    report: Option<&'a ConsistencyReport>,
    unverified: bool,
    matrix_index: Option<usize>,
}

fn weights_payload(p: &Project) -> Option<WeightsPayload<'_>> {
    let aw: &ActiveWeights = p.active_weights.as_ref()?;
    Some(WeightsPayload {
        weights: &aw.weights,
        report: aw.source_matrix.and_then(|k| p.matrices.get(k)).map(|m| &m.report),
        unverified: aw.override_unverified,
        matrix_index: aw.source_matrix,
    })
}

pub async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    name: Option<String>,
    criteria: Option<CriteriaSet>,
}

pub async fn create_session(State(st): State<AppState>, body: Option<Body<CreateSession>>) -> Result<Response, ApiError> {
    let req = body.map(|b| b.0).unwrap_or_default();
    let set = req.criteria.unwrap_or_else(builtin_ci_criteria);
    set.validate().map_err(|e| criteria_error("criteria.criteria", &set.ids(), &e))?;
    let id = uuid::Uuid::new_v4().to_string();
    let mut project = Project::new(req.name.as_deref().unwrap_or("session"), set, st.now());
    project.metadata.session = Some(SessionMeta { id: id.clone(), revision: 0 });
    st.insert_session(project)?;
    let mut resp = envelope(&id, 0, Stage::DefiningCriteria, json!({}));
    *resp.status_mut() = StatusCode::CREATED;
    Ok(resp)
}

pub async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let h = st.session(&id)?;
    let p = h.read().await;
    let (entered, required) = p.completeness();
    Ok(envelope(
        &id,
        revision_of(&p),
        p.metadata.stage,
        json!({ "entered": entered, "required": required, "project": &*p }),
    ))
}

pub async fn get_criteria(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let h = st.session(&id)?;
    let p = h.read().await;
    Ok(envelope(&id, revision_of(&p), p.metadata.stage, json!({ "criteria": &p.criteria_set })))
}

pub async fn put_criteria(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Body(set): Body<CriteriaSet>,
) -> Result<Response, ApiError> {
    let (out, rev, stage) = st
        .mutate(&id, &headers, |p, _| {
            require_stage(p, &[Stage::DefiningCriteria], "edit criteria")?;
            set.validate().map_err(|e| criteria_error("criteria", &set.ids(), &e))?;
            if p.criteria_set == set {
                return Ok((p.criteria_set.clone(), false));
            }
            p.replace_criteria(set)?;
            Ok((p.criteria_set.clone(), true))
        })
        .await?;
    Ok(envelope(&id, rev, stage, json!({ "criteria": out })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PutJudgment {
    row: String,
    col: String,
    value: String,
    #[serde(default)]
    rationale: Option<String>,
}

#[derive(Serialize)]
struct JudgmentProgress {
    entered: usize,
    required: usize,
    complete: bool,
    consistency: Option<ConsistencyReport>,
}

fn progress(p: &Project, threshold: f64) -> Result<JudgmentProgress, ApiError> {
    let (entered, required) = p.completeness();
    let consistency = if entered == required {
        let m = p.draft_matrix()?;
        Some(consistency(&m, &RandomIndexTable::default(), threshold)?)
    } else {
        None
    };
    Ok(JudgmentProgress {
        entered,
        required,
        complete: entered == required,
        consistency,
    })
}

pub async fn put_judgment(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Body(j): Body<PutJudgment>,
) -> Result<Response, ApiError> {
    let value: Saaty = j.value.parse().map_err(|e: ahp_eval::judgment::InvalidJudgment| ApiError::invalid("value", e.to_string()))?;
    let threshold = st.config().consistency_threshold;
    let (out, rev, stage) = st
        .mutate(&id, &headers, |p, _| {
            require_stage(p, &[Stage::DefiningCriteria, Stage::Comparing, Stage::WeightsReady], "enter judgments")?;
            for (path, cid) in [("row", &j.row), ("col", &j.col)] {
                if p.criteria_set.index_of(cid).is_none() {
                    return Err(ApiError::invalid(path, format!("unknown criterion `{cid}`")));
                }
            }
            if j.row == j.col {
                return Err(ApiError::invalid("col", "a criterion cannot be compared with itself"));
            }
            let changed = p.put_judgment(&j.row, &j.col, value, j.rationale.clone())?;
            if changed && p.metadata.stage != Stage::Comparing {
                // a judgment edit invalidates previously derived weights
                p.active_weights = None;
                p.metadata.stage = Stage::Comparing;
            }
            Ok((progress(p, threshold)?, changed))
        })
        .await?;
    Ok(envelope(&id, rev, stage, out))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DeriveWeights {
    #[serde(default)]
    method: WeightMethod,
    #[serde(default)]
    allow_unverified: bool,
}

pub async fn post_weights(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Option<Body<DeriveWeights>>,
) -> Result<Response, ApiError> {
    let req = body.map(|b| b.0).unwrap_or_default();
    if req.method == WeightMethod::Supplied {
        return Err(ApiError::invalid("method", "weights must be derived from judgments"));
    }
    let threshold = st.config().consistency_threshold;
    let (_, rev, stage) = st
        .mutate(&id, &headers, |p, _| {
            require_stage(p, &[Stage::DefiningCriteria, Stage::Comparing, Stage::WeightsReady], "derive weights")?;
            let m = p.draft_matrix()?;
            let k = p.add_matrix(m, threshold, Origin::Manual)?;
            let report = p.matrices[k].report.clone();
            p.activate_weights(k, req.method, req.allow_unverified).map_err(|e| match e {
                StorageError::GateRejected { .. } => ApiError::from(e).with_detail(&report),
                other => other.into(),
            })?;
            p.metadata.stage = Stage::WeightsReady;
            Ok(((), true))
        })
        .await?;
    let h = st.session(&id)?;
    let p = h.read().await;
    Ok(envelope(&id, rev, stage, weights_payload(&p)))
}

pub async fn get_weights(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let h = st.session(&id)?;
    let p = h.read().await;
    let payload = weights_payload(&p).ok_or_else(|| ApiError::not_found("no weights have been derived"))?;
    Ok(envelope(&id, revision_of(&p), p.metadata.stage, payload))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PutScores {
    #[serde(default)]
    normalization: Normalization,
    scores: Vec<RubricScore>,
}

pub async fn put_scores(
    State(st): State<AppState>,
    Path((id, name)): Path<(String, String)>,
    headers: HeaderMap,
    Body(req): Body<PutScores>,
) -> Result<Response, ApiError> {
    if name.trim().is_empty() {
        return Err(ApiError::invalid("name", "alternative name is empty"));
    }
    let (count, rev, stage) = st
        .mutate(&id, &headers, |p, _| {
            require_stage(p, &[Stage::WeightsReady, Stage::Scoring, Stage::Complete], "score alternatives")?;
            let before = p.score_sheets.iter().find(|s| s.alternative == name).cloned();
            let given: Vec<String> = req.scores.iter().map(|s| s.criterion_id.clone()).collect();
            p.set_scores(&name, req.scores.clone(), req.normalization).map_err(|e| match e {
                StorageError::Criteria(c) => criteria_error("scores", &given, &c),
                other => other.into(),
            })?;
            let after = p.score_sheets.iter().find(|s| s.alternative == name).cloned();
            let changed = before != after;
            if changed {
                p.evaluations.clear();
                p.sensitivity_reports.clear();
                p.metadata.stage = Stage::Scoring;
            }
            Ok((p.score_sheets.len(), changed))
        })
        .await?;
    Ok(envelope(&id, rev, stage, json!({ "alternative": name, "alternatives": count })))
}

#[derive(Serialize)]
struct AggregatePayload {
    evaluations: Vec<Evaluation>,
    ranking: ahp_eval::sensitivity::Ranking,
    unverified: bool,
}

pub async fn post_aggregate(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    let (out, rev, stage) = st
        .mutate(&id, &headers, |p, _| {
            require_stage(p, &[Stage::Scoring, Stage::Complete], "aggregate")?;
            let before = p.evaluations.clone();
            let evaluations = p.aggregate_all()?.to_vec();
            p.metadata.stage = Stage::Complete;
            let changed = before != evaluations;
            let unverified = p.active_weights.as_ref().is_some_and(|a| a.override_unverified);
            Ok((
                AggregatePayload {
                    ranking: rank_evaluations(&evaluations),
                    evaluations,
                    unverified,
                },
                changed,
            ))
        })
        .await?;
    Ok(envelope(&id, rev, stage, out))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SensitivityRequest {
    range: Option<f64>,
    steps: Option<usize>,
}

pub async fn post_sensitivity(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Option<Body<SensitivityRequest>>,
) -> Result<Response, ApiError> {
    let req = body.map(|b| b.0).unwrap_or_default();
    let (out, rev, stage) = st
        .mutate(&id, &headers, |p, _| {
            require_stage(p, &[Stage::Complete], "run sensitivity analysis")?;
            let w = &p.active_weights.as_ref().expect("complete implies weights").weights;
            let report = analyze(
                &p.evaluations,
                w,
                req.range.unwrap_or(DEFAULT_RANGE),
                req.steps.unwrap_or(DEFAULT_STEPS),
            )?;
            let changed = p.sensitivity_reports.last() != Some(&report);
            if changed {
                p.sensitivity_reports.push(report.clone());
            }
            Ok((report, changed))
        })
        .await?;
    Ok(envelope(&id, rev, stage, json!({ "report": out })))
}

#[derive(Deserialize)]
pub struct ReportQuery {
    #[serde(default)]
    kind: Option<String>,
}

pub async fn get_report(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let kind: ReportKind = match q.kind.as_deref() {
        None => ReportKind::Summary,
        Some(k) => k.parse().map_err(|e: String| ApiError::invalid("kind", e))?,
    };
    let h = st.session(&id)?;
    let p = h.read().await;
    let text = export_report(&p, kind)?;
    Ok(envelope(&id, revision_of(&p), p.metadata.stage, json!({ "kind": kind, "text": text })))
}

pub async fn get_chart(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let h = st.session(&id)?;
    let p = h.read().await;
    if p.evaluations.is_empty() {
        return Err(ApiError::conflict("incomplete", "no evaluations; aggregate first"));
    }
    let evals: Vec<&Evaluation> = p.evaluations.iter().collect();
    let chart = chart_data(&evals).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(envelope(&id, revision_of(&p), p.metadata.stage, json!({ "chart": chart })))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PanelStart {
    mode: Option<ElicitationMode>,
    max_rounds: Option<usize>,
    refine_top_k: Option<usize>,
    roles: Option<Vec<ExpertRole>>,
}

pub async fn post_panel(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Option<Body<PanelStart>>,
) -> Result<Response, ApiError> {
    let start = body.map(|b| b.0).unwrap_or_default();
    let h = st.session(&id)?;
    let (request, rev, stage) = {
        let p = h.read().await;
        require_stage(&p, &[Stage::DefiningCriteria, Stage::Comparing, Stage::WeightsReady], "start a panel")?;
        let mut r = ElicitationRequest::new(p.criteria_set.clone());
        r.consistency_threshold = st.config().consistency_threshold;
        r.model = ModelSettings {
            model: st.config().model.clone(),
            ..ModelSettings::default()
        };
        if let Some(m) = start.mode {
            r.mode = m;
        }
        if let Some(k) = start.refine_top_k {
            r.refine_top_k = k;
        }
        if let Some(roles) = start.roles {
            r.roles = roles;
        }
        (r, revision_of(&p), p.metadata.stage)
    };
    request.validate().map_err(|e| ApiError::invalid("body", e.to_string()))?;
    let max_rounds = start.max_rounds.unwrap_or(st.config().max_rounds);
    if max_rounds == 0 {
        return Err(ApiError::invalid("max_rounds", "must be at least 1"));
    }
    let job_id = uuid::Uuid::new_v4().to_string();
    let now = st.now();
    let job = st.insert_job(Job {
        job_id: job_id.clone(),
        session_id: id.clone(),
        status: JobStatus::Running,
        created: now,
        rounds: Vec::new(),
        outcome: None,
        error: None,
        retryable: false,
        accepted: false,
        request: request.clone(),
    });
    let client = st.client();
    tokio::task::spawn_blocking(move || {
        let progress = job.clone();
        let result = elicit_with_observer(&request, client.as_ref(), max_rounds, now, &mut |round| {
            progress.lock().expect("job").rounds.push(round.clone());
        });
        let mut j = job.lock().expect("job");
        match result {
            Ok(outcome) => {
                j.rounds = outcome.rounds.clone();
                j.outcome = Some(outcome);
                j.status = JobStatus::Succeeded;
            }
            Err(e) => {
                log::warn!("panel job {} failed: {e}", j.job_id);
                j.retryable = e.is_retryable();
                j.error = Some(e.to_string());
                j.status = JobStatus::Failed;
            }
        }
    });
    let mut resp = envelope(&id, rev, stage, json!({ "job_id": job_id, "status": JobStatus::Running }));
    *resp.status_mut() = StatusCode::ACCEPTED;
    Ok(resp)
}

pub async fn get_panel(State(st): State<AppState>, Path((id, job_id)): Path<(String, String)>) -> Result<Response, ApiError> {
    let job = st.job(&id, &job_id)?.lock().expect("job").clone();
    let h = st.session(&id)?;
    let p = h.read().await;
    Ok(envelope(&id, revision_of(&p), p.metadata.stage, job))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AcceptPanel {
    #[serde(default)]
    method: WeightMethod,
    #[serde(default)]
    allow_unverified: bool,
}

pub async fn accept_panel(
    State(st): State<AppState>,
    Path((id, job_id)): Path<(String, String)>,
    headers: HeaderMap,
    body: Option<Body<AcceptPanel>>,
) -> Result<Response, ApiError> {
    let req = body.map(|b| b.0).unwrap_or_default();
    if req.method == WeightMethod::Supplied {
        return Err(ApiError::invalid("method", "weights must be derived from judgments"));
    }
    let handle = st.job(&id, &job_id)?;
    let job = handle.lock().expect("job").clone();
    if job.status != JobStatus::Succeeded {
        return Err(ApiError::conflict("job-not-ready", format!("panel job is {:?}", job.status)));
    }
    if job.accepted {
        return Err(ApiError::conflict("job-accepted", "panel result was already accepted"));
    }
    let outcome = job.outcome.clone().expect("succeeded job has an outcome");
    let (_, rev, stage) = st
        .mutate(&id, &headers, |p, now| {
            require_stage(p, &[Stage::DefiningCriteria, Stage::Comparing, Stage::WeightsReady], "accept a panel result")?;
            if p.criteria_set != job.request.criteria_set {
                return Err(ApiError::conflict("criteria-changed", "criteria changed since the panel was started"));
            }
            let t = p.record_panel_run(&job_id, job.request.clone(), outcome.clone(), now, true);
            let k = p.transcripts[t].matrix_index.expect("adopted");
            let report = p.matrices[k].report.clone();
            p.activate_weights(k, req.method, req.allow_unverified).map_err(|e| match e {
                StorageError::GateRejected { .. } => ApiError::from(e).with_detail(&report),
                other => other.into(),
            })?;
            p.draft.clear();
            for j in &outcome.judgments.judgments {
                p.put_judgment(&j.row, &j.col, j.value, Some(j.rationale.clone()))?;
            }
            p.metadata.stage = Stage::WeightsReady;
            Ok(((), true))
        })
        .await?;
    handle.lock().expect("job").accepted = true;
    let h = st.session(&id)?;
    let p = h.read().await;
    Ok(envelope(&id, rev, stage, weights_payload(&p)))
}
