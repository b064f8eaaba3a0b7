//! Service configuration: TOML file, then `AHP_*` environment variables,
//! then command-line flags (applied by the caller).

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use ahp_eval::consistency::DEFAULT_THRESHOLD;
use ahp_eval::panel::{LlmConfig, DEFAULT_MAX_ROUNDS};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", .path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("environment variable {name}: {message}")]
    Env { name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub consistency_threshold: f64,
    /// Shared bearer token; requests must present it when set.
    pub bearer_token: Option<String>,
    pub model: String,
    pub max_rounds: usize,
    pub llm: LlmConfig,
    /// Replay panel replies from this directory instead of calling the model.
    pub fixtures_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("ahp-data"),
            consistency_threshold: DEFAULT_THRESHOLD,
            bearer_token: None,
            model: "gpt-4o".to_string(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            llm: LlmConfig::default(),
            fixtures_dir: None,
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::Env {
        name: name.to_string(),
        message: e.to_string(),
    })
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Toml {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Applies overrides from `vars`, normally `std::env::vars()`.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (name, value) in vars {
            match name.as_str() {
                "AHP_LISTEN" => self.listen = parse_env(&name, &value)?,
                "AHP_DATA_DIR" => self.data_dir = PathBuf::from(value),
                "AHP_THRESHOLD" => self.consistency_threshold = parse_env(&name, &value)?,
                "AHP_TOKEN" => self.bearer_token = Some(value).filter(|v| !v.is_empty()),
                "AHP_MODEL" => self.model = value,
                "AHP_MAX_ROUNDS" => self.max_rounds = parse_env(&name, &value)?,
                "AHP_LLM_BASE_URL" => self.llm.base_url = value,
                "AHP_LLM_PATH" => self.llm.path = value,
                "AHP_LLM_AUTH_HEADER" => self.llm.auth_header = value,
                "AHP_LLM_KEY_ENV" => self.llm.api_key_env = value,
                "AHP_FIXTURES_DIR" => self.fixtures_dir = Some(PathBuf::from(value)),
                _ => {}
            }
        }
        Ok(())
    }

    /// File (when given) plus process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply_env(std::env::vars())?;
        Ok(cfg)
    }
}
