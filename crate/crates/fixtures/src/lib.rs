//! Test support: local mock servers speaking the GitHub v3 and
//! OpenAI-compatible chat-completion wire formats, a fixture repository, and
//! brute-force metric oracles.

pub mod github;
pub mod llm;
pub mod oracle;
pub mod sample;

pub use github::MockGithub;
pub use llm::{MockLlm, MockReply};
