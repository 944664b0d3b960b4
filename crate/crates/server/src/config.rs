//! Environment variables and the optional `service.toml`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use commitbench_clients::{Credentials, GithubConfig, LlmConfig};
use commitbench_core::RetryPolicy;
use serde::Deserialize;
use url::Url;

pub const API_KEY_ENV: &str = commitbench_clients::llm::API_KEY_ENV;
pub const RESEARCH_PASSWORD_ENV: &str = "APCE_RESEARCH_PASSWORD";
pub const DATA_DIR_ENV: &str = "APCE_DATA_DIR";
pub const CONSENT_PATH_ENV: &str = "APCE_CONSENT_PATH";
pub const GITHUB_TOKEN_ENV: &str = "APCE_GITHUB_TOKEN";
pub const GITHUB_USERNAME_ENV: &str = "APCE_GITHUB_USERNAME";

pub const SERVICE_FILE: &str = "service.toml";
pub const DEFAULT_DATA_DIR: &str = "data";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("environment variable {0} is not set")]
    MissingEnv(&'static str),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid setting {key}: {message}")]
    Invalid { key: &'static str, message: String },
}

/// A snapshot of the process environment, so callers and tests can supply
/// their own variables.
#[derive(Debug, Clone, Default)]
pub struct Env(HashMap<String, String>);

impl Env {
    pub fn from_process() -> Self {
        Self(std::env::vars().collect())
    }

    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }

    /// The variable's value, treating empty as unset.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.trim().is_empty())
    }

    pub fn require(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.get(key).ok_or(ConfigError::MissingEnv(key))
    }

    pub fn data_dir(&self) -> PathBuf {
        PathBuf::from(self.get(DATA_DIR_ENV).unwrap_or(DEFAULT_DATA_DIR))
    }

    pub fn consent_path(&self) -> Option<PathBuf> {
        self.get(CONSENT_PATH_ENV).map(PathBuf::from)
    }

    pub fn github_credentials(&self) -> Result<Credentials, ConfigError> {
        Ok(Credentials::new(
            self.require(GITHUB_TOKEN_ENV)?,
            self.require(GITHUB_USERNAME_ENV)?,
        ))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LlmSection {
    base_url: Option<String>,
    model_id: Option<String>,
    timeout_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GithubSection {
    base_url: Option<String>,
    per_page: Option<u32>,
    in_flight_cap: Option<usize>,
    diff_budget: Option<usize>,
    timeout_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RetrySection {
    max_attempts: Option<u32>,
    delay_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServiceFile {
    #[serde(default)]
    llm: LlmSection,
    #[serde(default)]
    github: GithubSection,
    #[serde(default)]
    retry: RetrySection,
}

/// Settings read from `service.toml`, with defaults for everything absent.
#[derive(Debug, Clone, Default)]
pub struct ServiceSettings {
    pub llm_base_url: Option<Url>,
    pub model_id: Option<String>,
    pub llm_timeout_ms: Option<u64>,
    pub github: GithubConfig,
    pub retry: RetryPolicy,
}

fn parse_url(key: &'static str, raw: &str) -> Result<Url, ConfigError> {
    let mut raw = raw.to_owned();
    if !raw.ends_with('/') {
        raw.push('/');
    }
    Url::parse(&raw).map_err(|e| ConfigError::Invalid {
        key,
        message: e.to_string(),
    })
}

impl ServiceSettings {
    /// Reads `<config_dir>/service.toml`; a missing file gives the defaults.
    pub fn load(config_dir: &Path) -> Result<Self, ConfigError> {
        let path = config_dir.join(SERVICE_FILE);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(source) => return Err(ConfigError::Io { path, source }),
        };
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path, message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let file: ServiceFile = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from(SERVICE_FILE),
            message: e.to_string(),
        })?;
        let mut github = GithubConfig::default();
        if let Some(u) = &file.github.base_url {
            github.base_url = parse_url("github.base_url", u)?;
        }
        if let Some(n) = file.github.per_page {
            github.per_page = n;
        }
        if let Some(n) = file.github.in_flight_cap {
            github.in_flight_cap = n;
        }
        if let Some(n) = file.github.diff_budget {
            github.diff_budget = n;
        }
        if let Some(ms) = file.github.timeout_ms {
            github.timeout = Duration::from_millis(ms);
        }
        let defaults = RetryPolicy::default();
        let retry = RetryPolicy::new(
            file.retry.max_attempts.unwrap_or(defaults.max_attempts),
            file.retry.delay_ms.unwrap_or(defaults.delay_ms),
        )
        .map_err(|e| ConfigError::Invalid {
            key: "retry.max_attempts",
            message: e.to_string(),
        })?;
        Ok(Self {
            llm_base_url: file
                .llm
                .base_url
                .as_deref()
                .map(|u| parse_url("llm.base_url", u))
                .transpose()?,
            model_id: file.llm.model_id,
            llm_timeout_ms: file.llm.timeout_ms,
            github,
            retry,
        })
    }

    /// LLM settings with the API key taken from the environment.
    pub fn llm_config(&self, env: &Env) -> Result<LlmConfig, ConfigError> {
        let mut config = LlmConfig::new(env.require(API_KEY_ENV)?);
        if let Some(u) = &self.llm_base_url {
            config.base_url = u.clone();
        }
        if let Some(m) = &self.model_id {
            config.model_id = m.clone();
        }
        if let Some(ms) = self.llm_timeout_ms {
            config.timeout_ms = ms;
        }
        config.validate().map_err(|e| ConfigError::Invalid {
            key: "llm",
            message: e.to_string(),
        })?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let s = ServiceSettings::parse("").unwrap();
        assert_eq!(s.retry, RetryPolicy::default());
        assert_eq!(s.github.per_page, GithubConfig::default().per_page);
        assert!(s.llm_base_url.is_none());
    }

    #[test]
    fn sections_override_defaults() {
        let s = ServiceSettings::parse(
            "[llm]\nbase_url = \"http://127.0.0.1:9/v1\"\nmodel_id = \"m\"\n\
             [github]\nbase_url = \"http://127.0.0.1:9\"\nper_page = 5\n\
             [retry]\nmax_attempts = 2\ndelay_ms = 0\n",
        )
        .unwrap();
        assert_eq!(s.retry, RetryPolicy::new(2, 0).unwrap());
        assert_eq!(s.github.per_page, 5);
        assert_eq!(s.github.base_url.as_str(), "http://127.0.0.1:9/");
        let env = Env::from_pairs([(API_KEY_ENV, "k")]);
        let llm = s.llm_config(&env).unwrap();
        assert_eq!(llm.base_url.as_str(), "http://127.0.0.1:9/v1/");
        assert_eq!(llm.model_id, "m");
    }

    #[test]
    fn rejects_unknown_keys_and_zero_attempts() {
        assert!(ServiceSettings::parse("[llm]\nmodel = \"x\"\n").is_err());
        assert!(ServiceSettings::parse("[retry]\nmax_attempts = 0\n").is_err());
    }

    #[test]
    fn missing_api_key_names_the_variable() {
        let err = ServiceSettings::default().llm_config(&Env::default()).unwrap_err();
        assert!(err.to_string().contains(API_KEY_ENV));
    }

    #[test]
    fn empty_env_values_count_as_unset() {
        let env = Env::from_pairs([(DATA_DIR_ENV, " ")]);
        assert_eq!(env.data_dir(), PathBuf::from(DEFAULT_DATA_DIR));
    }
}
