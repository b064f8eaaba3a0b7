//! Shared service state: sessions backed by project files, and panel jobs.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use ahp_eval::panel::{ChatClient, ElicitationOutcome, ElicitationRequest, FixtureClient, HttpChatClient, RoundTranscript};
use ahp_eval::storage::{self, Project, Stage};
use axum::http::{HeaderMap, StatusCode};
use chrono::{DateTime, Utc};
use serde::Serialize;
use tokio::sync::RwLock;

use crate::config::ServiceConfig;
use crate::error::ApiError;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;
pub type ClientFactory = Arc<dyn Fn() -> Arc<dyn ChatClient> + Send + Sync>;
pub type SessionHandle = Arc<RwLock<Project>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobStatus {
    Running,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Job {
    pub job_id: String,
    pub session_id: String,
    pub status: JobStatus,
    pub created: DateTime<Utc>,
    /// Rounds completed so far, updated while the job runs.
    pub rounds: Vec<RoundTranscript>,
    pub outcome: Option<ElicitationOutcome>,
    pub error: Option<String>,
    pub retryable: bool,
    pub accepted: bool,
    #[serde(skip)]
    pub request: ElicitationRequest,
}

struct Inner {
    config: ServiceConfig,
    clock: Clock,
    clients: ClientFactory,
    sessions: Mutex<HashMap<String, SessionHandle>>,
    jobs: Mutex<HashMap<String, Arc<Mutex<Job>>>>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

/// Chat client chosen by configuration: fixture replay or the live endpoint.
pub fn default_client_factory(config: &ServiceConfig) -> ClientFactory {
    match &config.fixtures_dir {
        Some(dir) => {
            let dir = dir.clone();
            Arc::new(move || Arc::new(FixtureClient::new(dir.clone())) as Arc<dyn ChatClient>)
        }
        None => {
            let llm = config.llm.clone();
            Arc::new(move || Arc::new(HttpChatClient::from_env(llm.clone())) as Arc<dyn ChatClient>)
        }
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

/// Revision from an `If-Match` header, if one was sent.
pub fn expected_revision(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(raw) = headers.get(axum::http::header::IF_MATCH) else {
        return Ok(None);
    };
    let text = raw.to_str().unwrap_or("").trim().trim_start_matches("W/").trim_matches('"');
    text.parse()
        .map(Some)
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad-revision", format!("If-Match `{text}` is not a revision number")))
}

pub fn revision_of(p: &Project) -> u64 {
    p.metadata.session.as_ref().map(|s| s.revision).unwrap_or(0)
}

impl AppState {
    pub fn new(config: ServiceConfig, clock: Clock, clients: ClientFactory) -> Self {
        AppState {
            inner: Arc::new(Inner {
                config,
                clock,
                clients,
                sessions: Mutex::new(HashMap::new()),
                jobs: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn from_config(config: ServiceConfig) -> Self {
        let clients = default_client_factory(&config);
        Self::new(config, Arc::new(Utc::now), clients)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.inner.clock)()
    }

    pub fn client(&self) -> Arc<dyn ChatClient> {
        (self.inner.clients)()
    }

    fn path_for(&self, id: &str) -> PathBuf {
        self.inner.config.data_dir.join(format!("{id}.json"))
    }

    /// Looks up a session, loading it from disk on first access.
    pub fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        if !valid_id(id) {
            return Err(ApiError::not_found(format!("session `{id}`")));
        }
        let mut map = self.inner.sessions.lock().expect("session map");
        if let Some(h) = map.get(id) {
            return Ok(h.clone());
        }
        let path = self.path_for(id);
        if !path.exists() {
            return Err(ApiError::not_found(format!("session `{id}`")));
        }
        let project = storage::load(&path).map_err(|e| ApiError::internal(format!("loading session `{id}`: {e}")))?;
        let handle = Arc::new(RwLock::new(project));
        map.insert(id.to_string(), handle.clone());
        Ok(handle)
    }

    pub fn persist(&self, project: &Project) -> Result<(), ApiError> {
        let id = &project.metadata.session.as_ref().expect("session project").id;
        std::fs::create_dir_all(&self.inner.config.data_dir)
            .map_err(|e| ApiError::internal(format!("creating data directory: {e}")))?;
        storage::save(project, &self.path_for(id)).map_err(|e| ApiError::internal(e.to_string()))
    }

    pub fn insert_session(&self, project: Project) -> Result<String, ApiError> {
        let id = project.metadata.session.as_ref().expect("session project").id.clone();
        self.persist(&project)?;
        self.inner
            .sessions
            .lock()
            .expect("session map")
            .insert(id.clone(), Arc::new(RwLock::new(project)));
        Ok(id)
    }

    /// Applies `f` to a copy of the session project under its write lock.
    ///
    /// The copy replaces the stored project only when `f` succeeds and
    /// reports a change; the revision is then bumped and the file rewritten.
    /// A stale `If-Match` revision is rejected before `f` runs.
    pub async fn mutate<R>(
        &self,
        id: &str,
        headers: &HeaderMap,
        f: impl FnOnce(&mut Project, DateTime<Utc>) -> Result<(R, bool), ApiError>,
    ) -> Result<(R, u64, Stage), ApiError> {
        let handle = self.session(id)?;
        let expected = expected_revision(headers)?;
        let mut guard = handle.write().await;
        let current = revision_of(&guard);
        if let Some(rev) = expected {
            if rev != current {
                return Err(ApiError::conflict(
                    "stale-revision",
                    format!("revision {rev} is stale; the session is at revision {current}"),
                )
                .with_detail(serde_json::json!({ "current_revision": current })));
            }
        }
        let now = self.now();
        let mut work = guard.clone();
        let (out, changed) = f(&mut work, now)?;
        if !changed {
            return Ok((out, current, guard.metadata.stage));
        }
        if let Some(s) = work.metadata.session.as_mut() {
            s.revision = current + 1;
        }
        work.touch(now);
        self.persist(&work)?;
        let stage = work.metadata.stage;
        *guard = work;
        Ok((out, current + 1, stage))
    }

    pub fn insert_job(&self, job: Job) -> Arc<Mutex<Job>> {
        let handle = Arc::new(Mutex::new(job));
        let id = handle.lock().expect("job").job_id.clone();
        self.inner.jobs.lock().expect("job map").insert(id, handle.clone());
        handle
    }

    pub fn job(&self, session_id: &str, job_id: &str) -> Result<Arc<Mutex<Job>>, ApiError> {
        let jobs = self.inner.jobs.lock().expect("job map");
        match jobs.get(job_id) {
            Some(j) if j.lock().expect("job").session_id == session_id => Ok(j.clone()),
            _ => Err(ApiError::not_found(format!("panel job `{job_id}`"))),
        }
    }
}
