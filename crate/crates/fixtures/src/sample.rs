//! A small fixture repository: one repo, three commits with files, pull
//! requests, and linked issues.

use serde_json::{json, Value};

pub const TOKEN: &str = "ghp_fixture_token_0123456789";
pub const USERNAME: &str = "fixture-user";
pub const REPO: &str = "octo/widgets";

pub const SHA_FIX: &str = "1a2b3c4d5e6f708192a3b4c5d6e7f8091a2b3c4d";
pub const SHA_FEATURE: &str = "2b3c4d5e6f708192a3b4c5d6e7f8091a2b3c4d5e";
pub const SHA_DOCS: &str = "3c4d5e6f708192a3b4c5d6e7f8091a2b3c4d5e6f";

#[derive(Debug, Clone)]
pub struct FixtureFile {
    pub filename: &'static str,
    pub status: &'static str,
    pub additions: u64,
    pub deletions: u64,
    pub patch: &'static str,
}

#[derive(Debug, Clone)]
pub struct FixtureCommit {
    pub sha: &'static str,
    pub message: &'static str,
    pub date: &'static str,
    pub files: Vec<FixtureFile>,
    /// `(number, title, body)` of the associated pull request.
    pub pull: Option<(u64, &'static str, &'static str)>,
}

#[derive(Debug, Clone)]
pub struct FixtureRepo {
    pub id: u64,
    pub full_name: &'static str,
    /// Visible in `/user/repos` but answering 404 everywhere else.
    pub inaccessible: bool,
    /// Oldest first.
    pub commits: Vec<FixtureCommit>,
    /// `(number, title, body)`
    pub issues: Vec<(u64, &'static str, &'static str)>,
}

impl FixtureRepo {
    pub fn commit(&self, sha: &str) -> Option<&FixtureCommit> {
        self.commits.iter().find(|c| c.sha == sha)
    }
}

pub fn widgets_repo() -> FixtureRepo {
    FixtureRepo {
        id: 1001,
        full_name: REPO,
        inaccessible: false,
        commits: vec![
            FixtureCommit {
                sha: SHA_FIX,
                message: "Fix overflow in token parser (#12)",
                date: "2024-03-01T10:00:00Z",
                files: vec![FixtureFile {
                    filename: "src/parser.rs",
                    status: "modified",
                    additions: 3,
                    deletions: 1,
                    patch: "@@ -10,7 +10,9 @@ fn parse(input: &str) {\n-    let n = len as u8;\n+    let n = u16::try_from(len)\n+        .map_err(|_| ParseError::TooLong)?;\n+    check(n)?;",
                }],
                pull: Some((40, "Parser overflow fix", "Closes #12")),
            },
            FixtureCommit {
                sha: SHA_FEATURE,
                message: "Add retry logic to HTTP client\n\nRequests are retried three times.",
                date: "2024-03-02T11:30:00Z",
                files: vec![
                    FixtureFile {
                        filename: "src/client.rs",
                        status: "modified",
                        additions: 20,
                        deletions: 2,
                        patch: "@@ -1,3 +1,21 @@\n+use crate::retry::Retry;\n-    send(req)\n+    Retry::new(3).run(|| send(req))",
                    },
                    FixtureFile {
                        filename: "src/retry.rs",
                        status: "added",
                        additions: 40,
                        deletions: 0,
                        patch: "@@ -0,0 +1,40 @@\n+pub struct Retry { attempts: u32 }",
                    },
                ],
                pull: Some((41, "Retry support", "Implements the proposal in #7")),
            },
            FixtureCommit {
                sha: SHA_DOCS,
                message: "docs: describe configuration options",
                date: "2024-03-03T09:15:00Z",
                files: vec![FixtureFile {
                    filename: "README.md",
                    status: "modified",
                    additions: 5,
                    deletions: 1,
                    patch: "@@ -20,3 +20,7 @@\n+## Configuration\n+Set `WIDGETS_HOME`.",
                }],
                pull: None,
            },
        ],
        issues: vec![
            (12, "Parser overflows on long tokens", "Tokens longer than 255 bytes wrap around."),
            (7, "Retry transient HTTP failures", "The client gives up after one failure."),
        ],
    }
}

pub fn hidden_repo() -> FixtureRepo {
    FixtureRepo {
        id: 1002,
        full_name: "octo/secret",
        inaccessible: true,
        commits: Vec::new(),
        issues: Vec::new(),
    }
}

pub(crate) fn signature(date: &str) -> Value {
    json!({ "name": "Dev", "email": "dev@example.com", "date": date })
}

/// A repository with `n` single-file commits, one day apart, oldest first.
pub fn linear_repo(full_name: &'static str, n: usize) -> FixtureRepo {
    let leak = |s: String| -> &'static str { Box::leak(s.into_boxed_str()) };
    FixtureRepo {
        id: 2000 + n as u64,
        full_name,
        inaccessible: false,
        commits: (0..n)
            .map(|i| FixtureCommit {
                sha: leak(format!("{:040x}", 0xabc000 + i)),
                message: leak(format!("Change number {i}")),
                date: leak(format!("2024-01-{:02}T00:00:00Z", i + 1)),
                files: vec![FixtureFile {
                    filename: "src/lib.rs",
                    status: "modified",
                    additions: i as u64,
                    deletions: 1,
                    patch: "@@ -1 +1 @@\n-a\n+b",
                }],
                pull: None,
            })
            .collect(),
        issues: Vec::new(),
    }
}
