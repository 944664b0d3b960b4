//! Mechanical checks on LLM replies.

/// Subject-line length the selector prefers to stay under.
pub const PREFERRED_MAX_CHARS: usize = 72;

/// Replies at or above this length fail the no-refinement gate.
pub const UNREFINED_MAX_CHARS: usize = 200;

const PREAMBLES: &[&str] = &["sure", "here is", "here's", "i"];

const ERROR_SENTINELS: &[&str] = &["error", "[error]", "{\"error\"", "<error>"];

/// Length of the trimmed message in Unicode scalar values.
pub fn char_len(text: &str) -> usize {
    text.trim().chars().count()
}

/// `true` if `text` is an empty reply or the model's own error report
/// (`error: ...`, `{"error": ...}` and similar).
pub fn is_error_reply(text: &str) -> bool {
    let t = text.trim().to_lowercase();
    t.is_empty()
        || ERROR_SENTINELS.iter().any(|s| {
            t.strip_prefix(s)
                .is_some_and(|rest| rest.is_empty() || !rest.starts_with(char::is_alphanumeric))
        })
}

fn has_preamble(lower: &str) -> bool {
    PREAMBLES.iter().any(|p| {
        lower.strip_prefix(p).is_some_and(|rest| {
            rest.is_empty() || !rest.starts_with(char::is_alphanumeric)
        })
    })
}

/// Mechanical validity of a commit message: non-empty after trimming, a
/// single line, not an error sentinel, no markdown fencing, and no
/// conversational opener ("Sure", "Here is", "Here's", "I ...").
///
/// Openers match as whole words, so "Surface errors" and "Implement x" pass.
pub fn is_valid_commit_message(text: &str) -> bool {
    let t = text.trim();
    if t.is_empty() || t.contains('\n') || t.contains('\r') {
        return false;
    }
    if is_error_reply(t) || t.contains("```") {
        return false;
    }
    !has_preamble(&t.to_lowercase())
}
