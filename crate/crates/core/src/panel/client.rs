//! Chat-completion transport: a real HTTP client plus offline clients for
//! fixtures, scripted replies, and recording.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::digest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    /// SHA-256 of the canonical JSON form; used as the fixture key.
    pub fn digest(&self) -> String {
        digest(&serde_json::to_string(self).expect("request serializes"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    #[serde(default)]
    pub usage: Option<Usage>,
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("could not decode response: {0}")]
    Decode(String),
    #[error("no fixture for request {digest} (expected {})", .path.display())]
    MissingFixture { digest: String, path: PathBuf },
    #[error("client configuration: {0}")]
    Config(String),
    #[error("scripted client has no replies left")]
    Exhausted,
    #[error("fixture I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        match self {
            TransportError::Http { status, .. } => *status == 429 || *status >= 500,
            TransportError::Network(_) => true,
            _ => false,
        }
    }
}

pub trait ChatClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError>;
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (**self).complete(request)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for std::sync::Arc<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (**self).complete(request)
    }
}

/// Connection settings for an OpenAI-compatible chat endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub base_url: String,
    pub path: String,
    /// Header carrying the key; `Authorization` values get a `Bearer` prefix.
    pub auth_header: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: "https://api.openai.com".to_string(),
            path: "/v1/chat/completions".to_string(),
            auth_header: "Authorization".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            timeout_secs: 120,
        }
    }
}

pub struct HttpChatClient {
    config: LlmConfig,
    api_key: Option<String>,
}

impl HttpChatClient {
    /// Reads the key from `config.api_key_env`; a missing key is allowed for
    /// local endpoints that need none.
    pub fn from_env(config: LlmConfig) -> Self {
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        HttpChatClient { config, api_key }
    }

    pub fn with_key(config: LlmConfig, api_key: Option<String>) -> Self {
        HttpChatClient { config, api_key }
    }

    fn url(&self) -> String {
        format!("{}{}", self.config.base_url.trim_end_matches('/'), self.config.path)
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.config.timeout_secs))
            .build()
            .map_err(|e| TransportError::Config(e.to_string()))?;
        let mut body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        if let Some(m) = request.max_tokens {
            body["max_tokens"] = m.into();
        }
        let mut builder = client.post(self.url()).json(&body);
        if let Some(key) = &self.api_key {
            let value = if self.config.auth_header.eq_ignore_ascii_case("authorization") {
                format!("Bearer {key}")
            } else {
                key.clone()
            };
            builder = builder.header(self.config.auth_header.as_str(), value);
        }
        let resp = builder.send().map_err(|e| TransportError::Network(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| TransportError::Network(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError::Http {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| TransportError::Decode(e.to_string()))?;
        let content = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| TransportError::Decode("missing choices[0].message.content".into()))?;
        let usage = v.get("usage").and_then(|u| {
            Some(Usage {
                prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
                completion_tokens: u.get("completion_tokens")?.as_u64()?,
            })
        });
        Ok(ChatResponse {
            text: content.to_string(),
            usage,
        })
    }
}

/// Replays responses stored as `<dir>/<request digest>.txt`.
pub struct FixtureClient {
    dir: PathBuf,
}

impl FixtureClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureClient { dir: dir.into() }
    }

    pub fn path_for(dir: &Path, request: &ChatRequest) -> PathBuf {
        dir.join(format!("{}.txt", request.digest()))
    }
}

impl ChatClient for FixtureClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let path = Self::path_for(&self.dir, request);
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(ChatResponse { text, usage: None }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(TransportError::MissingFixture {
                digest: request.digest(),
                path,
            }),
            Err(e) => Err(e.into()),
        }
    }
}

/// Returns queued replies in order and keeps every request it saw.
#[derive(Default)]
pub struct ScriptedClient {
    replies: Mutex<VecDeque<Result<String, TransportError>>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedClient {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedClient {
            replies: Mutex::new(replies.into_iter().map(|s| Ok(s.into())).collect()),
            seen: Mutex::new(Vec::new()),
        }
    }

    /// Queues a failure to be returned in sequence.
    pub fn push_error(&self, err: TransportError) {
        self.replies.lock().unwrap().push_back(Err(err));
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().unwrap().clone()
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap().len()
    }
}

impl ChatClient for ScriptedClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        self.seen.lock().unwrap().push(request.clone());
        match self.replies.lock().unwrap().pop_front() {
            Some(Ok(text)) => Ok(ChatResponse { text, usage: None }),
            Some(Err(e)) => Err(e),
            None => Err(TransportError::Exhausted),
        }
    }
}

/// Forwards to another client and writes each reply as a fixture file.
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: ChatClient> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        RecordingClient { inner, dir: dir.into() }
    }
}

impl<C: ChatClient> ChatClient for RecordingClient<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let resp = self.inner.complete(request)?;
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(FixtureClient::path_for(&self.dir, request), &resp.text)?;
        Ok(resp)
    }
}
