//! Transport adapters: an OpenRouter-compatible chat-completion client and a
//! GitHub REST v3 client.

pub mod github;
pub mod llm;

pub use github::{CommitSummary, Credentials, GithubClient, GithubConfig, GithubError, RepoSummary};
pub use llm::{ConfigError, LlmConfig, OpenRouterClient};
