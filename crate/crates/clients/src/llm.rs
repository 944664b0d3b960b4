use std::fmt;
use std::sync::RwLock;
use std::time::Duration;

use async_trait::async_trait;
use commitbench_core::llm::{LlmError, LlmTransport};
use commitbench_core::Secret;
use serde::{Deserialize, Serialize};
use url::Url;

pub const DEFAULT_BASE_URL: &str = "https://openrouter.ai/api/v1/";
pub const DEFAULT_MODEL_ID: &str = "deepseek/deepseek-r1:free";
pub const DEFAULT_TIMEOUT_MS: u64 = 60_000;

/// Environment variable holding the provider API key.
pub const API_KEY_ENV: &str = "APCE_OPENROUTER_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("API key is empty")]
    EmptyApiKey,
    #[error("model id is empty")]
    EmptyModel,
    #[error("timeout must be greater than zero")]
    ZeroTimeout,
    #[error("base URL {0} cannot be used for HTTP requests")]
    BadBaseUrl(String),
}

#[derive(Clone, PartialEq, Eq)]
pub struct LlmConfig {
    pub base_url: Url,
    pub model_id: String,
    pub api_key: Secret,
    pub timeout_ms: u64,
}

impl LlmConfig {
    pub fn new(api_key: impl Into<Secret>) -> Self {
        Self {
            base_url: Url::parse(DEFAULT_BASE_URL).expect("default URL parses"),
            model_id: DEFAULT_MODEL_ID.to_owned(),
            api_key: api_key.into(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.api_key.is_empty() {
            return Err(ConfigError::EmptyApiKey);
        }
        if self.model_id.trim().is_empty() {
            return Err(ConfigError::EmptyModel);
        }
        if self.timeout_ms == 0 {
            return Err(ConfigError::ZeroTimeout);
        }
        if !matches!(self.base_url.scheme(), "http" | "https") || self.base_url.cannot_be_a_base() {
            return Err(ConfigError::BadBaseUrl(self.base_url.to_string()));
        }
        Ok(())
    }

    /// `<base_url>/chat/completions`
    pub fn endpoint(&self) -> Url {
        let mut base = self.base_url.clone();
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        base.join("chat/completions").expect("relative join on http URL")
    }
}

impl fmt::Debug for LlmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmConfig")
            .field("base_url", &self.base_url.as_str())
            .field("model_id", &self.model_id)
            .field("api_key", &self.api_key)
            .field("timeout_ms", &self.timeout_ms)
            .finish()
    }
}

impl fmt::Display for LlmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} via {} (key ***)", self.model_id, self.base_url)
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: Option<String>,
}

/// Chat-completion client. The configuration can be swapped at runtime;
/// in-flight calls finish against the configuration they started with.
pub struct OpenRouterClient {
    http: reqwest::Client,
    config: RwLock<LlmConfig>,
}

impl OpenRouterClient {
    pub fn new(config: LlmConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            http: reqwest::Client::new(),
            config: RwLock::new(config),
        })
    }

    pub fn config(&self) -> LlmConfig {
        self.config.read().unwrap().clone()
    }

    pub fn swap_provider(&self, config: LlmConfig) -> Result<(), ConfigError> {
        config.validate()?;
        *self.config.write().unwrap() = config;
        Ok(())
    }

    pub async fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let config = self.config();
        let body = ChatRequest {
            model: &config.model_id,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let resp = self
            .http
            .post(config.endpoint())
            .bearer_auth(config.api_key.expose())
            .timeout(Duration::from_millis(config.timeout_ms))
            .json(&body)
            .send()
            .await
            .map_err(|e| LlmError::Transport(e.without_url().to_string()))?;

        let status = resp.status();
        let text = resp
            .text()
            .await
            .map_err(|e| LlmError::Transport(e.without_url().to_string()))?;
        if !status.is_success() {
            return Err(LlmError::Status {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::Malformed(e.to_string()))?;
        let first = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::Malformed("response has no choices".into()))?;
        let content = first
            .message
            .content
            .ok_or_else(|| LlmError::Malformed("first choice has no content".into()))?;
        Ok(content.trim().to_owned())
    }
}

#[async_trait]
impl LlmTransport for OpenRouterClient {
    async fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        OpenRouterClient::complete(self, prompt).await
    }
}
