use serde::{Deserialize, Serialize};

use super::validity::{char_len, is_valid_commit_message, PREFERRED_MAX_CHARS};
use super::ErrorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageSource {
    GenerationAgent,
    RefinementAgent,
}

/// A trimmed LLM reply and the agent that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateMessage {
    text: String,
    source: MessageSource,
}

impl CandidateMessage {
    pub fn new(reply: &str, source: MessageSource) -> Self {
        Self {
            text: reply.trim().to_owned(),
            source,
        }
    }

    pub fn generated(reply: &str) -> Self {
        Self::new(reply, MessageSource::GenerationAgent)
    }

    pub fn refined(reply: &str) -> Self {
        Self::new(reply, MessageSource::RefinementAgent)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn source(&self) -> MessageSource {
        self.source
    }

    pub fn into_text(self) -> String {
        self.text
    }

    fn under_preferred_limit(&self) -> bool {
        char_len(&self.text) < PREFERRED_MAX_CHARS
    }
}

/// Which rule decided a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// The refinement agent echoed the draft unchanged.
    RefinerEcho,
    /// Only one of the two messages is valid.
    OnlyValid,
    /// Both valid, only one under 72 characters.
    PreferUnderLimit,
    /// Both valid and under 72 characters: the longer one.
    LongerUnderLimit,
    /// Both valid and at or over 72 characters: the shorter one.
    ShorterOverLimit,
    /// Both valid, same length class and same length: the refined one.
    TieRefined,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub message: CandidateMessage,
    pub rule: SelectionRule,
}

/// Picks between the generation agent's draft (`potential`) and the
/// refinement agent's reply (`alternative`).
///
/// In order: a lone valid message wins; two invalid messages are an error;
/// a lone message under 72 characters wins; two messages under 72 resolve to
/// the longer, two at or over 72 to the shorter; equal lengths resolve to
/// the alternative.
pub fn select_message(
    potential: CandidateMessage,
    alternative: CandidateMessage,
) -> Result<Selection, ErrorKind> {
    let pick = |message, rule| Ok(Selection { message, rule });
    match (
        is_valid_commit_message(potential.text()),
        is_valid_commit_message(alternative.text()),
    ) {
        (false, false) => Err(ErrorKind::BothInvalid),
        (true, false) => pick(potential, SelectionRule::OnlyValid),
        (false, true) => pick(alternative, SelectionRule::OnlyValid),
        (true, true) => {
            let (lp, la) = (char_len(potential.text()), char_len(alternative.text()));
            match (potential.under_preferred_limit(), alternative.under_preferred_limit()) {
                (true, false) => pick(potential, SelectionRule::PreferUnderLimit),
                (false, true) => pick(alternative, SelectionRule::PreferUnderLimit),
                _ if lp == la => pick(alternative, SelectionRule::TieRefined),
                (true, true) if lp > la => pick(potential, SelectionRule::LongerUnderLimit),
                (true, true) => pick(alternative, SelectionRule::LongerUnderLimit),
                _ if lp < la => pick(potential, SelectionRule::ShorterOverLimit),
                _ => pick(alternative, SelectionRule::ShorterOverLimit),
            }
        }
    }
}

/// Applies the echo short-circuit, then [`select_message`]. A valid draft
/// that the refinement agent returned verbatim is accepted as approved.
pub fn resolve_refinement(
    potential: CandidateMessage,
    alternative: CandidateMessage,
) -> Result<Selection, ErrorKind> {
    if potential.text() == alternative.text() && is_valid_commit_message(potential.text()) {
        return Ok(Selection {
            message: potential,
            rule: SelectionRule::RefinerEcho,
        });
    }
    select_message(potential, alternative)
}
