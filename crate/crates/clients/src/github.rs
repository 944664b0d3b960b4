//! GitHub REST v3 client for repository, commit, pull-request, and issue
//! lookups.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex};
use std::time::Duration;

use chrono::{DateTime, TimeZone, Utc};
use commitbench_core::commit::{truncate_diff, DEFAULT_DIFF_BUDGET};
use commitbench_core::{classify_commit_type, CommitContext, CommitId, FileChange, FileStatus, Secret};
use regex::Regex;
use reqwest::header::{HeaderMap, ACCEPT, USER_AGENT};
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use url::Url;

pub const DEFAULT_API_URL: &str = "https://api.github.com/";

static ISSUE_REF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#(\d+)\b").unwrap());

/// A GitHub token and the account it belongs to. Lives in memory only.
#[derive(Clone, PartialEq, Eq)]
pub struct Credentials {
    pub token: Secret,
    pub username: String,
}

impl Credentials {
    pub fn new(token: impl Into<Secret>, username: impl Into<String>) -> Self {
        Self {
            token: token.into(),
            username: username.into(),
        }
    }
}

impl fmt::Debug for Credentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Credentials")
            .field("token", &self.token)
            .field("username", &self.username)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GithubError {
    #[error("GitHub token is empty")]
    EmptyToken,
    #[error("GitHub rejected the credentials")]
    Auth,
    #[error("GitHub rate limit exceeded (resets at {reset:?})")]
    RateLimited { reset: Option<DateTime<Utc>> },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid repository {0:?}: expected owner/name")]
    InvalidRepo(String),
    #[error(transparent)]
    InvalidSha(#[from] commitbench_core::commit::InvalidCommitId),
    #[error("GitHub returned status {status}: {body}")]
    Api { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed GitHub response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoSummary {
    pub id: u64,
    pub full_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitSummary {
    pub sha: String,
    pub summary: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone)]
pub struct GithubConfig {
    pub base_url: Url,
    /// Page size for commit listings.
    pub per_page: u32,
    /// Concurrent requests allowed per token.
    pub in_flight_cap: usize,
    /// Diffs longer than this many bytes are truncated.
    pub diff_budget: usize,
    pub timeout: Duration,
}

impl Default for GithubConfig {
    fn default() -> Self {
        Self {
            base_url: Url::parse(DEFAULT_API_URL).expect("default URL parses"),
            per_page: 30,
            in_flight_cap: 4,
            diff_budget: DEFAULT_DIFF_BUDGET,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Deserialize)]
struct RawRepo {
    id: u64,
    full_name: String,
}

#[derive(Deserialize)]
struct RawSignature {
    date: DateTime<Utc>,
}

#[derive(Deserialize)]
struct RawCommitMeta {
    message: String,
    author: Option<RawSignature>,
    committer: Option<RawSignature>,
}

impl RawCommitMeta {
    fn timestamp(&self) -> DateTime<Utc> {
        self.author
            .as_ref()
            .or(self.committer.as_ref())
            .map(|s| s.date)
            .unwrap_or_else(|| Utc.timestamp_opt(0, 0).unwrap())
    }
}

#[derive(Deserialize)]
struct RawListedCommit {
    sha: String,
    commit: RawCommitMeta,
}

#[derive(Deserialize)]
struct RawFile {
    filename: String,
    status: String,
    #[serde(default)]
    additions: u64,
    #[serde(default)]
    deletions: u64,
    patch: Option<String>,
    previous_filename: Option<String>,
}

#[derive(Deserialize)]
struct RawCommitDetail {
    sha: String,
    commit: RawCommitMeta,
    #[serde(default)]
    files: Vec<RawFile>,
}

#[derive(Deserialize)]
struct RawPull {
    title: String,
    body: Option<String>,
}

#[derive(Deserialize)]
struct RawIssue {
    title: String,
    body: Option<String>,
}

fn file_status(raw: &str) -> FileStatus {
    match raw {
        "added" | "copied" => FileStatus::Added,
        "removed" | "deleted" => FileStatus::Deleted,
        "renamed" => FileStatus::Renamed,
        _ => FileStatus::Modified,
    }
}

fn file_diff(f: &RawFile) -> String {
    let status = file_status(&f.status);
    let old = f.previous_filename.as_deref().unwrap_or(&f.filename);
    let from = if status == FileStatus::Added {
        "/dev/null".to_owned()
    } else {
        format!("a/{old}")
    };
    let to = if status == FileStatus::Deleted {
        "/dev/null".to_owned()
    } else {
        format!("b/{}", f.filename)
    };
    let mut out = format!("diff --git a/{old} b/{}\n--- {from}\n+++ {to}\n", f.filename);
    match &f.patch {
        Some(p) => {
            out.push_str(p);
            if !p.ends_with('\n') {
                out.push('\n');
            }
        }
        None => out.push_str("Binary files differ\n"),
    }
    out
}

/// First `#N` reference in `text`.
pub fn first_issue_ref(text: &str) -> Option<u64> {
    ISSUE_REF
        .captures_iter(text)
        .find_map(|c| c[1].parse::<u64>().ok())
}

fn validate_repo(repo: &str) -> Result<(), GithubError> {
    let mut parts = repo.split('/');
    let ok = matches!(
        (parts.next(), parts.next(), parts.next()),
        (Some(o), Some(n), None) if !o.is_empty() && !n.is_empty()
            && !repo.contains(char::is_whitespace) && o != ".." && n != ".."
    );
    if ok {
        Ok(())
    } else {
        Err(GithubError::InvalidRepo(repo.to_owned()))
    }
}

fn rate_limit_reset(headers: &HeaderMap) -> Option<DateTime<Utc>> {
    headers
        .get("x-ratelimit-reset")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse::<i64>().ok())
        .and_then(|secs| Utc.timestamp_opt(secs, 0).single())
}

fn is_rate_limited(status: StatusCode, headers: &HeaderMap) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS
        || (status == StatusCode::FORBIDDEN
            && (headers.get("x-ratelimit-remaining").and_then(|v| v.to_str().ok()) == Some("0")
                || headers.contains_key("retry-after")))
}

pub struct GithubClient {
    http: reqwest::Client,
    config: GithubConfig,
    limits: Mutex<HashMap<u64, Arc<Semaphore>>>,
}

impl GithubClient {
    pub fn new(config: GithubConfig) -> Self {
        Self {
            http: reqwest::Client::new(),
            config,
            limits: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &GithubConfig {
        &self.config
    }

    fn limiter(&self, creds: &Credentials) -> Arc<Semaphore> {
        let mut h = DefaultHasher::new();
        creds.token.expose().hash(&mut h);
        let key = h.finish();
        let mut limits = self.limits.lock().unwrap();
        Arc::clone(
            limits
                .entry(key)
                .or_insert_with(|| Arc::new(Semaphore::new(self.config.in_flight_cap.max(1)))),
        )
    }

    fn url(&self, path: &str, query: &[(&str, String)]) -> Url {
        let mut base = self.config.base_url.clone();
        if !base.path().ends_with('/') {
            let p = format!("{}/", base.path());
            base.set_path(&p);
        }
        let mut url = base.join(path).expect("relative API path");
        if !query.is_empty() {
            url.query_pairs_mut().extend_pairs(query.iter().map(|(k, v)| (*k, v.as_str())));
        }
        url
    }

    async fn get<T: DeserializeOwned>(
        &self,
        creds: &Credentials,
        path: &str,
        query: &[(&str, String)],
    ) -> Result<T, GithubError> {
        if creds.token.is_empty() {
            return Err(GithubError::EmptyToken);
        }
        let limiter = self.limiter(creds);
        let _permit = limiter.acquire().await.expect("semaphore never closed");
        let resp = self
            .http
            .get(self.url(path, query))
            .bearer_auth(creds.token.expose())
            .header(ACCEPT, "application/vnd.github+json")
            .header(USER_AGENT, "commitbench")
            .header("X-GitHub-Api-Version", "2022-11-28")
            .timeout(self.config.timeout)
            .send()
            .await
            .map_err(|e| GithubError::Transport(e.without_url().to_string()))?;

        let status = resp.status();
        if status.is_success() {
            return resp
                .json::<T>()
                .await
                .map_err(|e| GithubError::Malformed(e.without_url().to_string()));
        }
        let headers = resp.headers().clone();
        if is_rate_limited(status, &headers) {
            return Err(GithubError::RateLimited {
                reset: rate_limit_reset(&headers),
            });
        }
        match status {
            StatusCode::UNAUTHORIZED => Err(GithubError::Auth),
            StatusCode::NOT_FOUND => Err(GithubError::NotFound(path.to_owned())),
            _ => {
                let body = resp.text().await.unwrap_or_default();
                Err(GithubError::Api {
                    status: status.as_u16(),
                    body: body.chars().take(500).collect(),
                })
            }
        }
    }

    /// All repositories visible to the token.
    pub async fn list_repositories(&self, creds: &Credentials) -> Result<Vec<RepoSummary>, GithubError> {
        const PAGE: usize = 100;
        let mut out = Vec::new();
        for page in 1.. {
            let batch: Vec<RawRepo> = self
                .get(
                    creds,
                    "user/repos",
                    &[("per_page", PAGE.to_string()), ("page", page.to_string())],
                )
                .await?;
            let n = batch.len();
            out.extend(batch.into_iter().map(|r| RepoSummary {
                id: r.id,
                full_name: r.full_name,
            }));
            if n < PAGE {
                break;
            }
        }
        Ok(out)
    }

    /// One page (1-based) of the repository's commits, newest first.
    pub async fn list_commits(
        &self,
        creds: &Credentials,
        repo: &str,
        page: u32,
    ) -> Result<Vec<CommitSummary>, GithubError> {
        validate_repo(repo)?;
        let raw: Vec<RawListedCommit> = self
            .get(
                creds,
                &format!("repos/{repo}/commits"),
                &[
                    ("per_page", self.config.per_page.to_string()),
                    ("page", page.max(1).to_string()),
                ],
            )
            .await?;
        let mut out: Vec<CommitSummary> = raw
            .into_iter()
            .map(|c| CommitSummary {
                summary: c.commit.message.lines().next().unwrap_or("").trim().to_owned(),
                timestamp: c.commit.timestamp(),
                sha: c.sha,
            })
            .collect();
        out.sort_by_key(|c| std::cmp::Reverse(c.timestamp));
        Ok(out)
    }

    async fn issue_report(
        &self,
        creds: &Credentials,
        repo: &str,
        number: u64,
    ) -> Result<Option<String>, GithubError> {
        match self
            .get::<RawIssue>(creds, &format!("repos/{repo}/issues/{number}"), &[])
            .await
        {
            Ok(issue) => {
                let body = issue.body.unwrap_or_default();
                let text = if body.trim().is_empty() {
                    issue.title
                } else {
                    format!("{}\n\n{}", issue.title, body.trim())
                };
                Ok(Some(text))
            }
            Err(GithubError::NotFound(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Diff, files, PR title, linked issue, and classified type for one commit.
    pub async fn get_commit_context(
        &self,
        creds: &Credentials,
        repo: &str,
        sha: &str,
    ) -> Result<CommitContext, GithubError> {
        validate_repo(repo)?;
        let commit_id = CommitId::parse(sha)?;
        let detail: RawCommitDetail = self
            .get(creds, &format!("repos/{repo}/commits/{sha}"), &[])
            .await?;

        let pulls: Vec<RawPull> = match self
            .get(creds, &format!("repos/{repo}/commits/{sha}/pulls"), &[])
            .await
        {
            Ok(p) => p,
            Err(GithubError::NotFound(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        let pull = pulls.into_iter().next();

        let issue_ref = first_issue_ref(&detail.commit.message).or_else(|| {
            pull.as_ref()
                .and_then(|p| p.body.as_deref())
                .and_then(first_issue_ref)
        });
        let issue_report = match issue_ref {
            Some(n) => self.issue_report(creds, repo, n).await?,
            None => None,
        };

        let diff: String = detail.files.iter().map(file_diff).collect();
        let files: Vec<FileChange> = detail
            .files
            .iter()
            .map(|f| FileChange::new(f.filename.clone(), file_status(&f.status), f.additions, f.deletions))
            .collect();
        let commit_type = classify_commit_type(&detail.commit.message, &files);
        let commit_id = CommitId::parse(&detail.sha).unwrap_or(commit_id);

        Ok(CommitContext {
            commit_id,
            repo: repo.to_owned(),
            timestamp: detail.commit.timestamp(),
            original_message: detail.commit.message,
            diff: truncate_diff(&diff, self.config.diff_budget),
            pr_title: pull.map(|p| p.title),
            issue_report,
            commit_type,
            files,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn issue_refs() {
        assert_eq!(first_issue_ref("Fix overflow (#12)"), Some(12));
        assert_eq!(first_issue_ref("see #3 and #4"), Some(3));
        assert_eq!(first_issue_ref("no refs # here"), None);
    }

    #[test]
    fn repo_names() {
        assert!(validate_repo("octo/widgets").is_ok());
        assert!(validate_repo("octo").is_err());
        assert!(validate_repo("a/b/c").is_err());
        assert!(validate_repo("/b").is_err());
        assert!(validate_repo("octo/my repo").is_err());
    }

    #[test]
    fn diff_headers() {
        let f = RawFile {
            filename: "new.rs".into(),
            status: "added".into(),
            additions: 1,
            deletions: 0,
            patch: Some("@@ -0,0 +1 @@\n+fn main() {}".into()),
            previous_filename: None,
        };
        let d = file_diff(&f);
        assert!(d.starts_with("diff --git a/new.rs b/new.rs\n--- /dev/null\n+++ b/new.rs\n@@"));
        assert!(d.ends_with("{}\n"));
    }

    #[test]
    fn credentials_debug_redacts() {
        let c = Credentials::new("ghp_secret123", "octocat");
        assert!(!format!("{c:?}").contains("secret123"));
    }

    #[test]
    fn status_mapping() {
        assert_eq!(file_status("removed"), FileStatus::Deleted);
        assert_eq!(file_status("renamed"), FileStatus::Renamed);
        assert_eq!(file_status("changed"), FileStatus::Modified);
    }
}
