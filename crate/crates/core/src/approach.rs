//! Generation approaches and prompt rendering.
//!
//! A template may reference commit data through five literal tags:
//! `[DIFF]`, `[PR]`, `[IR]`, `[CT]`, `[OM]`. The refinement prompt carries a
//! single `[MESSAGE]` tag. There is no escaping: a tag in a template is always
//! substituted. Substituted values are never rescanned.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::commit::CommitContext;

/// Text substituted for context fields the commit does not have.
pub const MISSING_VALUE: &str = "N/A";

/// Tag the refinement prompt uses for the candidate message.
pub const MESSAGE_TAG: &str = "[MESSAGE]";

pub const DEFAULT_APPROACH_NAME: &str = "Default";

/// Generation prompt of the stock approach. It deliberately omits `[OM]`:
/// feeding the original message to the model leaks the reference the
/// metrics score against.
pub const DEFAULT_TEMPLATE: &str = "\
Generate a high-quality commit message based on the given information. Your response must contain only the commit message\u{2014}no explanations, no punctuation, no extra words.

### Requirements:
- Must clearly describe what changed and why
- Must follow standard commit message formatting
- Must use imperative mood
- Must not include any punctuation

### Given Data:
1. Code changes: [DIFF]
2. Associated pull request title: [PR]
3. Associated issue report: [IR]
4. Commit Type: [CT]
";

pub const DEFAULT_REFINEMENT_PROMPT: &str = "\
Evaluate the commit message below.

If it fully meets all criteria, reply only with the exact same commit message.

If it does not fully meet all criteria, reply only with a corrected commit message.

Your response must contain nothing else\u{2014}no explanations, no punctuation, no extra words.

Criteria:
- Must be less than 72 characters
- Must use imperative mood (e.g., \"Fix bug\" instead of \"Fixed bug\")
- Must clearly describe the change
- Must not include explanations or reasoning
- May describe multiple changes

Commit message to evaluate: \"[MESSAGE]\"
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placeholder {
    Diff,
    PullRequest,
    IssueReport,
    CommitType,
    OriginalMessage,
}

impl Placeholder {
    pub const ALL: [Placeholder; 5] = [
        Placeholder::Diff,
        Placeholder::PullRequest,
        Placeholder::IssueReport,
        Placeholder::CommitType,
        Placeholder::OriginalMessage,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Placeholder::Diff => "[DIFF]",
            Placeholder::PullRequest => "[PR]",
            Placeholder::IssueReport => "[IR]",
            Placeholder::CommitType => "[CT]",
            Placeholder::OriginalMessage => "[OM]",
        }
    }

    /// The context value for this tag, `None` when the commit lacks it.
    pub fn value(self, ctx: &CommitContext) -> Option<&str> {
        let non_empty = |s: &str| !s.trim().is_empty();
        match self {
            Placeholder::Diff => Some(ctx.diff.as_str()).filter(|s| non_empty(s)),
            Placeholder::PullRequest => ctx.pr_title.as_deref().filter(|s| non_empty(s)),
            Placeholder::IssueReport => ctx.issue_report.as_deref().filter(|s| non_empty(s)),
            Placeholder::CommitType => Some(ctx.commit_type.label()),
            Placeholder::OriginalMessage => {
                Some(ctx.original_message.as_str()).filter(|s| non_empty(s))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApproachError {
    #[error("approach name must not be empty")]
    EmptyName,
    #[error("approach {0:?} has an empty template")]
    EmptyTemplate(String),
    #[error("an approach named {0:?} already exists")]
    DuplicateName(String),
    #[error("no approach named {0:?}")]
    UnknownName(String),
    #[error("refinement prompt must contain [MESSAGE] exactly once (found {0})")]
    MessageTag(usize),
}

/// A named generation configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Approach {
    pub name: String,
    pub template: String,
    #[serde(alias = "refinement")]
    pub refinement_enabled: bool,
}

impl Approach {
    pub fn new(name: impl Into<String>, template: impl Into<String>, refinement_enabled: bool) -> Self {
        Self {
            name: name.into(),
            template: template.into(),
            refinement_enabled,
        }
    }

    /// The stock approach shipped with a fresh configuration.
    pub fn default_approach() -> Self {
        Self::new(DEFAULT_APPROACH_NAME, DEFAULT_TEMPLATE, true)
    }

    pub fn validate(&self) -> Result<(), ApproachError> {
        if self.name.trim().is_empty() {
            return Err(ApproachError::EmptyName);
        }
        if self.template.trim().is_empty() {
            return Err(ApproachError::EmptyTemplate(self.name.clone()));
        }
        Ok(())
    }

    pub fn uses(&self, placeholder: Placeholder) -> bool {
        self.template.contains(placeholder.tag())
    }

    pub fn render(&self, ctx: &CommitContext) -> String {
        render_prompt(&self.template, ctx)
    }
}

/// Replaces every placeholder tag in `template` with the matching context
/// field, or [`MISSING_VALUE`] when the field is absent. All other bytes are
/// copied unchanged.
pub fn render_prompt(template: &str, ctx: &CommitContext) -> String {
    let mut out = String::with_capacity(template.len() + ctx.diff.len());
    let mut rest = template;
    while let Some(open) = rest.find('[') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        match Placeholder::ALL.iter().find(|p| tail.starts_with(p.tag())) {
            Some(p) => {
                out.push_str(p.value(ctx).unwrap_or(MISSING_VALUE));
                rest = &tail[p.tag().len()..];
            }
            None => {
                out.push('[');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Refinement-agent prompt; holds exactly one `[MESSAGE]` tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RefinementPrompt(String);

impl RefinementPrompt {
    pub fn new(template: impl Into<String>) -> Result<Self, ApproachError> {
        let template = template.into();
        match template.matches(MESSAGE_TAG).count() {
            1 => Ok(Self(template)),
            n => Err(ApproachError::MessageTag(n)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Substitutes `message` for `[MESSAGE]`; nothing else is touched.
    pub fn render(&self, message: &str) -> String {
        self.0.replacen(MESSAGE_TAG, message, 1)
    }
}

impl Default for RefinementPrompt {
    fn default() -> Self {
        Self(DEFAULT_REFINEMENT_PROMPT.to_owned())
    }
}

impl TryFrom<String> for RefinementPrompt {
    type Error = ApproachError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<RefinementPrompt> for String {
    fn from(p: RefinementPrompt) -> String {
        p.0
    }
}

impl fmt::Display for RefinementPrompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;
    use crate::commit::{CommitId, CommitType};

    fn ctx() -> CommitContext {
        CommitContext {
            commit_id: CommitId::parse("abcdef1").unwrap(),
            repo: "octo/widgets".into(),
            original_message: "Fix overflow".into(),
            diff: "+x".into(),
            pr_title: None,
            issue_report: None,
            commit_type: CommitType::BugFix,
            timestamp: chrono::Utc.with_ymd_and_hms(2024, 1, 2, 3, 4, 5).unwrap(),
            files: vec![],
        }
    }

    #[test]
    fn direct_substitution() {
        assert_eq!(render_prompt("Changes: [DIFF]", &ctx()), "Changes: +x");
    }

    #[test]
    fn missing_fields_render_na() {
        assert_eq!(render_prompt("PR=[PR] IR=[IR]", &ctx()), "PR=N/A IR=N/A");
    }

    #[test]
    fn substituted_text_is_not_rescanned() {
        let mut c = ctx();
        c.diff = "[PR] literal".into();
        c.pr_title = Some("title".into());
        assert_eq!(render_prompt("[DIFF] / [PR]", &c), "[PR] literal / title");
    }

    #[test]
    fn unrelated_brackets_survive() {
        let t = "a [b] [DIF] [[CT]] [MESSAGE] ]";
        assert_eq!(render_prompt(t, &ctx()), "a [b] [DIF] [bug fix] [MESSAGE] ]");
    }

    #[test]
    fn default_approach_omits_original_message() {
        let a = Approach::default_approach();
        assert!(a.refinement_enabled);
        assert!(!a.uses(Placeholder::OriginalMessage));
        assert!(a.uses(Placeholder::Diff));
    }

    #[test]
    fn refinement_prompt_tag_count() {
        assert!(RefinementPrompt::new("no tag").is_err());
        assert_eq!(
            RefinementPrompt::new("[MESSAGE] [MESSAGE]"),
            Err(ApproachError::MessageTag(2))
        );
        let p = RefinementPrompt::default();
        let rendered = p.render("Fix [DIFF] bug");
        assert!(rendered.ends_with("Commit message to evaluate: \"Fix [DIFF] bug\"\n"));
        assert_eq!(rendered.replace("Fix [DIFF] bug", "[MESSAGE]"), p.as_str());
    }

    #[test]
    fn validation() {
        assert_eq!(Approach::new(" ", "t", true).validate(), Err(ApproachError::EmptyName));
        assert!(matches!(
            Approach::new("x", "  ", true).validate(),
            Err(ApproachError::EmptyTemplate(_))
        ));
    }
}
