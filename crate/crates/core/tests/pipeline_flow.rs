use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use async_trait::async_trait;
use chrono::{TimeZone, Utc};
use commitbench_core::clock::VirtualClock;
use commitbench_core::llm::{LlmError, LlmTransport};
use commitbench_core::pipeline::{MessageSource, SelectionRule};
use commitbench_core::{
    Approach, CommitContext, CommitId, CommitType, ErrorKind, FileChange, FileStatus, Pipeline,
    RefinementPrompt, RetryPolicy,
};

const ORIGINAL: &str = "Fix overflow in token parser";

/// Replays a fixed list of replies and records every prompt.
struct Scripted {
    replies: Mutex<VecDeque<Result<String, LlmError>>>,
    prompts: Mutex<Vec<String>>,
}

impl Scripted {
    fn new(replies: Vec<Result<&str, LlmError>>) -> Arc<Self> {
        Arc::new(Self {
            replies: Mutex::new(replies.into_iter().map(|r| r.map(str::to_owned)).collect()),
            prompts: Mutex::new(Vec::new()),
        })
    }

    fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }
}

#[async_trait]
impl LlmTransport for Scripted {
    async fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        self.prompts.lock().unwrap().push(prompt.to_owned());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(LlmError::Transport("script exhausted".into())))
    }
}

fn down() -> Result<&'static str, LlmError> {
    Err(LlmError::Status {
        status: 503,
        body: "unavailable".into(),
    })
}

fn context() -> CommitContext {
    CommitContext {
        commit_id: CommitId::parse("0123456789abcdef0123456789abcdef01234567").unwrap(),
        repo: "octo/widgets".into(),
        original_message: ORIGINAL.into(),
        diff: "--- a/src/parser.rs\n+++ b/src/parser.rs\n-let n = a + b;\n+let n = a.checked_add(b)?;".into(),
        pr_title: None,
        issue_report: None,
        commit_type: CommitType::BugFix,
        timestamp: Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap(),
        files: vec![FileChange::new("src/parser.rs", FileStatus::Modified, 1, 1)],
    }
}

fn pipeline(llm: Arc<Scripted>) -> (Pipeline, Arc<VirtualClock>) {
    let clock = Arc::new(VirtualClock::new());
    (Pipeline::new(llm).with_clock(clock.clone()), clock)
}

fn refinement() -> RefinementPrompt {
    commitbench_core::ApproachRegistry::seeded().refinement_prompt().clone()
}

fn approach(refine: bool) -> Approach {
    let mut a = Approach::default_approach();
    a.refinement_enabled = refine;
    a
}

#[tokio::test]
async fn retry_sleeps_between_failures_only() {
    let llm = Scripted::new(vec![down(), down(), Ok("Guard parser addition")]);
    let (p, clock) = pipeline(llm.clone());
    let started = Instant::now();
    assert_eq!(p.call_with_retry("x").await.unwrap(), "Guard parser addition");
    assert_eq!(clock.sleeps(), vec![Duration::from_millis(5000); 2]);
    assert_eq!(llm.prompts().len(), 3);
    assert!(started.elapsed() < Duration::from_secs(1));
}

#[tokio::test]
async fn retry_gives_up_after_max_attempts() {
    let llm = Scripted::new(vec![down(), down(), down(), Ok("never reached")]);
    let (p, clock) = pipeline(llm.clone());
    let err = p.call_with_retry("x").await.unwrap_err();
    assert_eq!(err.attempts, 3);
    assert_eq!(llm.prompts().len(), 3);
    assert_eq!(clock.elapsed(), Duration::from_millis(10_000));

    let (p, _) = pipeline(Scripted::new(vec![down(), down(), down()]));
    let r = p.run_approach(&approach(false), &context(), &refinement()).await;
    assert_eq!(r.error_kind(), Some(ErrorKind::LlmUnavailable));
    assert!(r.is_consistent());
}

#[tokio::test]
async fn custom_policy_is_honoured() {
    let llm = Scripted::new(vec![down(), down(), down(), down(), down()]);
    let clock = Arc::new(VirtualClock::new());
    let p = Pipeline::new(llm.clone())
        .with_clock(clock.clone())
        .with_policy(RetryPolicy::new(5, 10).unwrap());
    assert!(p.call_with_retry("x").await.is_err());
    assert_eq!(llm.prompts().len(), 5);
    assert_eq!(clock.elapsed(), Duration::from_millis(40));
    assert!(RetryPolicy::new(0, 10).is_err());
}

#[tokio::test]
async fn unrefined_length_boundary() {
    let at_199 = "a".repeat(199);
    let at_200 = "a".repeat(200);
    for (reply, ok) in [(at_199.as_str(), true), (at_200.as_str(), false)] {
        let llm = Scripted::new(vec![Ok(reply)]);
        let (p, _) = pipeline(llm.clone());
        let r = p.run_approach(&approach(false), &context(), &refinement()).await;
        assert_eq!(r.success(), ok, "len {}", reply.len());
        if !ok {
            assert_eq!(r.error_kind(), Some(ErrorKind::TooLongUnrefined));
        }
        assert!(!r.refinement_used());
        assert_eq!(llm.prompts().len(), 1);
    }
}

#[tokio::test]
async fn unrefined_error_reply_fails() {
    let llm = Scripted::new(vec![Ok("Error: model overloaded")]);
    let (p, _) = pipeline(llm);
    let r = p.run_approach(&approach(false), &context(), &refinement()).await;
    assert_eq!(r.error_kind(), Some(ErrorKind::InvalidUnrefined));
    assert_eq!(r.message(), None);
    assert_eq!(r.scores(), None);
}

#[tokio::test]
async fn refinement_flow_selects_and_scores() {
    let draft = "Fix overflow when adding parser token offsets together safely";
    let refined = "Fix overflow in parser offsets";
    let llm = Scripted::new(vec![Ok(draft), Ok(refined)]);
    let (p, _) = pipeline(llm.clone());
    let r = p.run_approach(&approach(true), &context(), &refinement()).await;
    assert!(r.success());
    assert!(r.refinement_used());
    assert_eq!(r.message(), Some(draft));
    assert_eq!(r.rule(), Some(SelectionRule::LongerUnderLimit));
    assert_eq!(r.source(), Some(MessageSource::GenerationAgent));
    let s = r.scores().unwrap();
    assert!(s.in_unit_range() && s.bleu > 0.0);

    let prompts = llm.prompts();
    assert_eq!(prompts.len(), 2);
    assert!(prompts[1].contains(draft));
    assert!(!prompts[1].contains("[MESSAGE]"));
}

#[tokio::test]
async fn refiner_echo_short_circuits() {
    let llm = Scripted::new(vec![Ok("Guard parser addition"), Ok("  Guard parser addition\n")]);
    let (p, _) = pipeline(llm);
    let r = p.run_approach(&approach(true), &context(), &refinement()).await;
    assert_eq!(r.rule(), Some(SelectionRule::RefinerEcho));
    assert_eq!(r.message(), Some("Guard parser addition"));
}

#[tokio::test]
async fn both_invalid_fails() {
    let llm = Scripted::new(vec![Ok("Sure! Here is a message"), Ok("```\nfix\n```")]);
    let (p, _) = pipeline(llm);
    let r = p.run_approach(&approach(true), &context(), &refinement()).await;
    assert_eq!(r.error_kind(), Some(ErrorKind::BothInvalid));
    assert!(r.refinement_used());
}

#[tokio::test]
async fn prompts_never_contain_the_original_message() {
    let llm = Scripted::new(vec![Ok("Guard parser addition"), Ok("Guard parser addition")]);
    let (p, _) = pipeline(llm.clone());
    let mut ctx = context();
    ctx.diff = "+let n = a.checked_add(b)?;".into();
    let custom = Approach::new("Terse", "Diff: [DIFF] Issue: [IR] PR: [PR] Type: [CT]", true);
    let results = p
        .generate_for_commit(&ctx, &[approach(true), custom], &refinement())
        .await
        .unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0].approach_name(), "Default");
    assert_eq!(results[1].approach_name(), "Terse");
    let prompts = llm.prompts();
    assert!(!prompts.is_empty());
    for prompt in prompts {
        assert!(!prompt.contains(ORIGINAL), "{prompt}");
    }
}

#[tokio::test]
async fn no_approaches_is_an_error() {
    let (p, _) = pipeline(Scripted::new(vec![]));
    assert!(p.generate_for_commit(&context(), &[], &refinement()).await.is_err());
}
