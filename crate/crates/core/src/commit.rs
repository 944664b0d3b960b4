//! Commit snapshot types shared by the Git-host client, the generation
//! pipeline, and stored submissions.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::metrics::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid commit id {0:?}: expected 7 to 40 lowercase hex digits")]
pub struct InvalidCommitId(pub String);

/// Abbreviated or full lowercase hex SHA.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CommitId(String);

impl CommitId {
    pub fn parse(s: &str) -> Result<Self, InvalidCommitId> {
        let ok = (7..=40).contains(&s.len())
            && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        if ok {
            Ok(Self(s.to_owned()))
        } else {
            Err(InvalidCommitId(s.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for CommitId {
    type Err = InvalidCommitId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for CommitId {
    type Error = InvalidCommitId;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

impl From<CommitId> for String {
    fn from(id: CommitId) -> String {
        id.0
    }
}

impl fmt::Display for CommitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommitType {
    Feature,
    BugFix,
    Docs,
    Refactor,
    Test,
    Chore,
    Unknown,
}

impl CommitType {
    pub fn as_str(self) -> &'static str {
        match self {
            CommitType::Feature => "feature",
            CommitType::BugFix => "bug_fix",
            CommitType::Docs => "docs",
            CommitType::Refactor => "refactor",
            CommitType::Test => "test",
            CommitType::Chore => "chore",
            CommitType::Unknown => "unknown",
        }
    }

    /// Wording used when the type is substituted into a prompt.
    pub fn label(self) -> &'static str {
        match self {
            CommitType::BugFix => "bug fix",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for CommitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileStatus {
    Added,
    Modified,
    Deleted,
    Renamed,
}

impl FileStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FileStatus::Added => "added",
            FileStatus::Modified => "modified",
            FileStatus::Deleted => "deleted",
            FileStatus::Renamed => "renamed",
        }
    }
}

/// Per-file change statistics. `changes` is always `additions + deletions`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFileChange")]
pub struct FileChange {
    filename: String,
    status: FileStatus,
    additions: u64,
    deletions: u64,
    changes: u64,
}

#[derive(Deserialize)]
struct RawFileChange {
    filename: String,
    status: FileStatus,
    additions: u64,
    deletions: u64,
    changes: u64,
}

impl TryFrom<RawFileChange> for FileChange {
    type Error = String;

    fn try_from(raw: RawFileChange) -> Result<Self, String> {
        if raw.additions + raw.deletions != raw.changes {
            return Err(format!(
                "file {}: changes ({}) != additions ({}) + deletions ({})",
                raw.filename, raw.changes, raw.additions, raw.deletions
            ));
        }
        Ok(FileChange::new(raw.filename, raw.status, raw.additions, raw.deletions))
    }
}

impl FileChange {
    pub fn new(filename: impl Into<String>, status: FileStatus, additions: u64, deletions: u64) -> Self {
        Self {
            filename: filename.into(),
            status,
            additions,
            deletions,
            changes: additions + deletions,
        }
    }

    pub fn filename(&self) -> &str {
        &self.filename
    }

    pub fn status(&self) -> FileStatus {
        self.status
    }

    pub fn additions(&self) -> u64 {
        self.additions
    }

    pub fn deletions(&self) -> u64 {
        self.deletions
    }

    pub fn changes(&self) -> u64 {
        self.changes
    }
}

/// Everything known about one commit; the substitution source for prompt
/// placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitContext {
    pub commit_id: CommitId,
    /// `owner/name`
    pub repo: String,
    pub original_message: String,
    /// Unified diff text, possibly truncated to the client's byte budget.
    pub diff: String,
    pub pr_title: Option<String>,
    pub issue_report: Option<String>,
    pub commit_type: CommitType,
    pub timestamp: DateTime<Utc>,
    pub files: Vec<FileChange>,
}

/// Marker line appended to a diff cut at the byte budget.
pub const TRUNCATION_MARKER: &str = "[... diff truncated ...]";

/// Default diff budget: 64 KiB.
pub const DEFAULT_DIFF_BUDGET: usize = 64 * 1024;

/// Cuts `diff` to at most `budget` bytes (on a char boundary, preferring the
/// last full line) and appends [`TRUNCATION_MARKER`] on its own line.
pub fn truncate_diff(diff: &str, budget: usize) -> String {
    if diff.len() <= budget {
        return diff.to_owned();
    }
    let mut cut = budget;
    while !diff.is_char_boundary(cut) {
        cut -= 1;
    }
    let head = &diff[..cut];
    let head = match head.rfind('\n') {
        Some(nl) => &head[..=nl],
        None => head,
    };
    let mut out = String::with_capacity(head.len() + TRUNCATION_MARKER.len() + 1);
    out.push_str(head);
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(TRUNCATION_MARKER);
    out
}

fn conventional_prefix(message: &str) -> Option<CommitType> {
    let first = message.lines().next()?.trim_start().to_lowercase();
    let colon = first.find(':')?;
    let head = first[..colon].trim_end_matches('!');
    let kind = match head.find('(') {
        Some(open) if head.ends_with(')') => &head[..open],
        Some(_) => return None,
        None => head,
    };
    match kind {
        "feat" => Some(CommitType::Feature),
        "fix" => Some(CommitType::BugFix),
        "docs" => Some(CommitType::Docs),
        "refactor" => Some(CommitType::Refactor),
        "test" => Some(CommitType::Test),
        "chore" => Some(CommitType::Chore),
        _ => None,
    }
}

const BUG_WORDS: &[&str] = &["fix", "fixes", "fixed", "fixing", "bug", "bugs", "bugfix"];
const FEATURE_WORDS: &[&str] = &[
    "add", "adds", "added", "adding", "implement", "implements", "implemented", "implementing",
];

fn is_docs_path(path: &str) -> bool {
    let lower = path.to_ascii_lowercase();
    let file = lower.rsplit('/').next().unwrap_or(&lower);
    lower.starts_with("docs/")
        || lower.starts_with("doc/")
        || lower.contains("/docs/")
        || [".md", ".rst", ".adoc", ".txt"].iter().any(|ext| file.ends_with(ext))
        || file.starts_with("readme")
        || file.starts_with("changelog")
        || file.starts_with("license")
}

/// Conventional-commit prefix first, then message keywords, then a docs-only
/// file set; `Unknown` otherwise.
pub fn classify_commit_type(message: &str, files: &[FileChange]) -> CommitType {
    if let Some(kind) = conventional_prefix(message) {
        return kind;
    }
    let tokens = tokenize(message);
    if tokens.iter().any(|t| BUG_WORDS.contains(&t.as_str())) {
        return CommitType::BugFix;
    }
    if tokens.iter().any(|t| FEATURE_WORDS.contains(&t.as_str())) {
        return CommitType::Feature;
    }
    if !files.is_empty() && files.iter().all(|f| is_docs_path(f.filename())) {
        return CommitType::Docs;
    }
    CommitType::Unknown
}
