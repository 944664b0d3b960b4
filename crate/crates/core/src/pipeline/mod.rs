//! Two-agent commit-message generation.
//!
//! For each approach the generation agent drafts a message from the rendered
//! template. With refinement enabled, the refinement agent reviews the draft
//! and the selector picks one of the two; without it, the draft only has to
//! be a non-error reply under 200 characters. Every LLM call goes through a
//! bounded retry loop.

mod select;
mod validity;

use std::sync::Arc;
use std::time::Duration;

use futures::future::join_all;
use serde::{Deserialize, Serialize};

use crate::approach::{Approach, RefinementPrompt};
use crate::clock::{Clock, SystemClock};
use crate::commit::CommitContext;
use crate::llm::{LlmError, LlmTransport};
use crate::metrics::score_all;
use crate::MetricScores;

pub use select::{
    resolve_refinement, select_message, CandidateMessage, MessageSource, Selection, SelectionRule,
};
pub use validity::{
    char_len, is_error_reply, is_valid_commit_message, PREFERRED_MAX_CHARS, UNREFINED_MAX_CHARS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    LlmUnavailable,
    BothInvalid,
    InvalidUnrefined,
    TooLongUnrefined,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::LlmUnavailable => "llm_unavailable",
            ErrorKind::BothInvalid => "both_invalid",
            ErrorKind::InvalidUnrefined => "invalid_unrefined",
            ErrorKind::TooLongUnrefined => "too_long_unrefined",
        }
    }
}

impl std::fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("no approaches configured")]
    NoApproaches,
    #[error("invalid retry policy: max_attempts must be at least 1")]
    InvalidPolicy,
}

/// Outcome of running one approach on one commit.
///
/// `success` holds exactly when `message` is present and `error_kind` is
/// absent; `scores` only accompany a success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawResult")]
pub struct GenerationResult {
    approach_name: String,
    message: Option<String>,
    success: bool,
    refinement_used: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<MessageSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<SelectionRule>,
    error_kind: Option<ErrorKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_detail: Option<String>,
    scores: Option<MetricScores>,
}

#[derive(Deserialize)]
struct RawResult {
    approach_name: String,
    message: Option<String>,
    success: bool,
    refinement_used: bool,
    #[serde(default)]
    source: Option<MessageSource>,
    #[serde(default)]
    rule: Option<SelectionRule>,
    error_kind: Option<ErrorKind>,
    #[serde(default)]
    error_detail: Option<String>,
    scores: Option<MetricScores>,
}

impl TryFrom<RawResult> for GenerationResult {
    type Error = String;

    fn try_from(r: RawResult) -> Result<Self, String> {
        let out = GenerationResult {
            approach_name: r.approach_name,
            message: r.message,
            success: r.success,
            refinement_used: r.refinement_used,
            source: r.source,
            rule: r.rule,
            error_kind: r.error_kind,
            error_detail: r.error_detail,
            scores: r.scores,
        };
        if out.is_consistent() {
            Ok(out)
        } else {
            Err("inconsistent generation result".into())
        }
    }
}

impl GenerationResult {
    /// A successful result, scored against `original`.
    pub fn succeeded(
        approach: &Approach,
        message: CandidateMessage,
        rule: Option<SelectionRule>,
        refinement_used: bool,
        original: &str,
    ) -> Self {
        let scores = score_all(original, message.text());
        Self {
            approach_name: approach.name.clone(),
            source: Some(message.source()),
            message: Some(message.into_text()),
            success: true,
            refinement_used,
            rule,
            error_kind: None,
            error_detail: None,
            scores: Some(scores),
        }
    }

    pub fn failed(
        approach: &Approach,
        kind: ErrorKind,
        refinement_used: bool,
        detail: Option<String>,
    ) -> Self {
        Self {
            approach_name: approach.name.clone(),
            message: None,
            success: false,
            refinement_used,
            source: None,
            rule: None,
            error_kind: Some(kind),
            error_detail: detail,
            scores: None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.success == self.message.is_some()
            && self.success == self.error_kind.is_none()
            && (self.scores.is_none() || self.success)
    }

    pub fn approach_name(&self) -> &str {
        &self.approach_name
    }

    pub fn message(&self) -> Option<&str> {
        self.message.as_deref()
    }

    pub fn success(&self) -> bool {
        self.success
    }

    pub fn refinement_used(&self) -> bool {
        self.refinement_used
    }

    pub fn source(&self) -> Option<MessageSource> {
        self.source
    }

    pub fn rule(&self) -> Option<SelectionRule> {
        self.rule
    }

    pub fn error_kind(&self) -> Option<ErrorKind> {
        self.error_kind
    }

    pub fn error_detail(&self) -> Option<&str> {
        self.error_detail.as_deref()
    }

    pub fn scores(&self) -> Option<&MetricScores> {
        self.scores.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            delay_ms: 5000,
        }
    }
}

impl RetryPolicy {
    pub fn new(max_attempts: u32, delay_ms: u64) -> Result<Self, PipelineError> {
        if max_attempts == 0 {
            return Err(PipelineError::InvalidPolicy);
        }
        Ok(Self {
            max_attempts,
            delay_ms,
        })
    }

    pub fn delay(&self) -> Duration {
        Duration::from_millis(self.delay_ms)
    }
}

/// All attempts failed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("LLM unavailable after {attempts} attempt(s): {last}")]
pub struct LlmUnavailable {
    pub attempts: u32,
    pub last: LlmError,
}

/// Calls the transport up to `policy.max_attempts` times, sleeping
/// `policy.delay_ms` between consecutive failures. The first success returns
/// immediately.
pub async fn call_with_retry(
    llm: &dyn LlmTransport,
    clock: &dyn Clock,
    prompt: &str,
    policy: RetryPolicy,
) -> Result<String, LlmUnavailable> {
    let attempts = policy.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        match llm.complete(prompt).await {
            Ok(reply) => return Ok(reply),
            Err(last) if attempt >= attempts => return Err(LlmUnavailable { attempts, last }),
            Err(_) => {
                clock.sleep(policy.delay()).await;
                attempt += 1;
            }
        }
    }
}

/// The generation and refinement agents share one transport.
#[derive(Clone)]
pub struct Pipeline {
    llm: Arc<dyn LlmTransport>,
    clock: Arc<dyn Clock>,
    policy: RetryPolicy,
}

impl Pipeline {
    pub fn new(llm: Arc<dyn LlmTransport>) -> Self {
        Self {
            llm,
            clock: Arc::new(SystemClock),
            policy: RetryPolicy::default(),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_policy(mut self, policy: RetryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> RetryPolicy {
        self.policy
    }

    pub async fn call_with_retry(&self, prompt: &str) -> Result<String, LlmUnavailable> {
        call_with_retry(self.llm.as_ref(), self.clock.as_ref(), prompt, self.policy).await
    }

    pub async fn run_approach(
        &self,
        approach: &Approach,
        ctx: &CommitContext,
        refinement: &RefinementPrompt,
    ) -> GenerationResult {
        let refine = approach.refinement_enabled;
        let draft = match self.call_with_retry(&approach.render(ctx)).await {
            Ok(reply) => CandidateMessage::generated(&reply),
            Err(e) => {
                return GenerationResult::failed(
                    approach,
                    ErrorKind::LlmUnavailable,
                    false,
                    Some(e.to_string()),
                )
            }
        };

        if !refine {
            if is_error_reply(draft.text()) {
                return GenerationResult::failed(approach, ErrorKind::InvalidUnrefined, false, None);
            }
            if char_len(draft.text()) >= UNREFINED_MAX_CHARS {
                return GenerationResult::failed(approach, ErrorKind::TooLongUnrefined, false, None);
            }
            return GenerationResult::succeeded(approach, draft, None, false, &ctx.original_message);
        }

        let alternative = match self.call_with_retry(&refinement.render(draft.text())).await {
            Ok(reply) => CandidateMessage::refined(&reply),
            Err(e) => {
                return GenerationResult::failed(
                    approach,
                    ErrorKind::LlmUnavailable,
                    true,
                    Some(e.to_string()),
                )
            }
        };

        match resolve_refinement(draft, alternative) {
            Ok(sel) => GenerationResult::succeeded(
                approach,
                sel.message,
                Some(sel.rule),
                true,
                &ctx.original_message,
            ),
            Err(kind) => GenerationResult::failed(approach, kind, true, None),
        }
    }

    /// Runs every approach concurrently; results come back in `approaches`
    /// order, one per approach.
    pub async fn generate_for_commit(
        &self,
        ctx: &CommitContext,
        approaches: &[Approach],
        refinement: &RefinementPrompt,
    ) -> Result<Vec<GenerationResult>, PipelineError> {
        if approaches.is_empty() {
            return Err(PipelineError::NoApproaches);
        }
        Ok(join_all(approaches.iter().map(|a| self.run_approach(a, ctx, refinement))).await)
    }
}
