//! Mock of the GitHub REST v3 endpoints the client uses.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde_json::{json, Value};

use crate::sample::{signature, FixtureRepo};

/// Reset timestamp reported while rate limiting (2024-01-01T00:00:00Z).
pub const RATE_LIMIT_RESET: i64 = 1_704_067_200;

#[derive(Debug, Clone)]
pub struct RecordedRequest {
    pub path: String,
    pub authorization: Option<String>,
}

struct Inner {
    token: String,
    repos: Vec<FixtureRepo>,
    rate_limited: AtomicBool,
    requests: Mutex<Vec<RecordedRequest>>,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    delay_ms: AtomicUsize,
}

#[derive(Clone)]
pub struct MockGithub {
    addr: SocketAddr,
    inner: Arc<Inner>,
}

type Reply = Result<Json<Value>, Response>;

fn error(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "message": message }))).into_response()
}

impl MockGithub {
    /// Serves `repos` to requests bearing `token`. Must be called inside a
    /// tokio runtime.
    pub async fn start(token: &str, repos: Vec<FixtureRepo>) -> Self {
        let inner = Arc::new(Inner {
            token: token.to_owned(),
            repos,
            rate_limited: AtomicBool::new(false),
            requests: Mutex::new(Vec::new()),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
            delay_ms: AtomicUsize::new(0),
        });
        let app = Router::new()
            .route("/user/repos", get(list_repos))
            .route("/repos/{owner}/{name}/commits", get(list_commits))
            .route("/repos/{owner}/{name}/commits/{sha}", get(get_commit))
            .route("/repos/{owner}/{name}/commits/{sha}/pulls", get(commit_pulls))
            .route("/repos/{owner}/{name}/issues/{number}", get(get_issue))
            .with_state(Arc::clone(&inner));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        Self { addr, inner }
    }

    pub fn base_url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    pub fn set_rate_limited(&self, on: bool) {
        self.inner.rate_limited.store(on, Ordering::SeqCst);
    }

    /// Adds latency to every response so concurrency is observable.
    pub fn set_delay_ms(&self, ms: usize) {
        self.inner.delay_ms.store(ms, Ordering::SeqCst);
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.inner.requests.lock().unwrap().clone()
    }

    pub fn max_in_flight(&self) -> usize {
        self.inner.max_in_flight.load(Ordering::SeqCst)
    }
}

struct InFlight<'a>(&'a Inner);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

async fn gate<'a>(inner: &'a Inner, headers: &HeaderMap, path: String) -> Result<InFlight<'a>, Response> {
    let authorization = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .map(str::to_owned);
    inner.requests.lock().unwrap().push(RecordedRequest {
        path,
        authorization: authorization.clone(),
    });
    let now = inner.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    inner.max_in_flight.fetch_max(now, Ordering::SeqCst);
    let guard = InFlight(inner);
    let delay = inner.delay_ms.load(Ordering::SeqCst);
    if delay > 0 {
        tokio::time::sleep(std::time::Duration::from_millis(delay as u64)).await;
    }
    if inner.rate_limited.load(Ordering::SeqCst) {
        let mut resp = error(StatusCode::FORBIDDEN, "API rate limit exceeded");
        let h = resp.headers_mut();
        h.insert("x-ratelimit-remaining", "0".parse().unwrap());
        h.insert("x-ratelimit-reset", RATE_LIMIT_RESET.to_string().parse().unwrap());
        return Err(resp);
    }
    if authorization.as_deref() != Some(&format!("Bearer {}", inner.token)) {
        return Err(error(StatusCode::UNAUTHORIZED, "Bad credentials"));
    }
    Ok(guard)
}

#[allow(clippy::result_large_err)]
fn find_repo<'a>(inner: &'a Inner, owner: &str, name: &str) -> Result<&'a FixtureRepo, Response> {
    let full = format!("{owner}/{name}");
    inner
        .repos
        .iter()
        .find(|r| r.full_name == full && !r.inaccessible)
        .ok_or_else(|| error(StatusCode::NOT_FOUND, "Not Found"))
}

fn page_params(q: &HashMap<String, String>, default_per_page: usize) -> (usize, usize) {
    let per_page = q.get("per_page").and_then(|v| v.parse().ok()).unwrap_or(default_per_page);
    let page = q.get("page").and_then(|v| v.parse().ok()).unwrap_or(1usize).max(1);
    (per_page.max(1), page)
}

async fn list_repos(
    State(inner): State<Arc<Inner>>,
    headers: HeaderMap,
    Query(q): Query<HashMap<String, String>>,
) -> Reply {
    let _g = gate(&inner, &headers, "/user/repos".into()).await?;
    let (per_page, page) = page_params(&q, 30);
    let items: Vec<Value> = inner
        .repos
        .iter()
        .skip((page - 1) * per_page)
        .take(per_page)
        .map(|r| json!({ "id": r.id, "full_name": r.full_name, "name": r.full_name.split('/').nth(1), "private": r.inaccessible }))
        .collect();
    Ok(Json(Value::Array(items)))
}

async fn list_commits(
    State(inner): State<Arc<Inner>>,
    headers: HeaderMap,
    Path((owner, name)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
) -> Reply {
    let _g = gate(&inner, &headers, format!("/repos/{owner}/{name}/commits")).await?;
    let repo = find_repo(&inner, &owner, &name)?;
    let (per_page, page) = page_params(&q, 30);
    let items: Vec<Value> = repo
        .commits
        .iter()
        .rev()
        .skip((page - 1) * per_page)
        .take(per_page)
        .map(|c| {
            json!({
                "sha": c.sha,
                "commit": {
                    "message": c.message,
                    "author": signature(c.date),
                    "committer": signature(c.date),
                }
            })
        })
        .collect();
    Ok(Json(Value::Array(items)))
}

async fn get_commit(
    State(inner): State<Arc<Inner>>,
    headers: HeaderMap,
    Path((owner, name, sha)): Path<(String, String, String)>,
) -> Reply {
    let _g = gate(&inner, &headers, format!("/repos/{owner}/{name}/commits/{sha}")).await?;
    let repo = find_repo(&inner, &owner, &name)?;
    let c = repo
        .commits
        .iter()
        .find(|c| c.sha.starts_with(&sha))
        .ok_or_else(|| error(StatusCode::NOT_FOUND, "No commit found for SHA"))?;
    let files: Vec<Value> = c
        .files
        .iter()
        .map(|f| {
            json!({
                "filename": f.filename,
                "status": f.status,
                "additions": f.additions,
                "deletions": f.deletions,
                "changes": f.additions + f.deletions,
                "patch": f.patch,
            })
        })
        .collect();
    Ok(Json(json!({
        "sha": c.sha,
        "commit": {
            "message": c.message,
            "author": signature(c.date),
            "committer": signature(c.date),
        },
        "files": files,
    })))
}

async fn commit_pulls(
    State(inner): State<Arc<Inner>>,
    headers: HeaderMap,
    Path((owner, name, sha)): Path<(String, String, String)>,
) -> Reply {
    let _g = gate(&inner, &headers, format!("/repos/{owner}/{name}/commits/{sha}/pulls")).await?;
    let repo = find_repo(&inner, &owner, &name)?;
    let c = repo
        .commits
        .iter()
        .find(|c| c.sha.starts_with(&sha))
        .ok_or_else(|| error(StatusCode::NOT_FOUND, "No commit found for SHA"))?;
    let pulls: Vec<Value> = c
        .pull
        .iter()
        .map(|(number, title, body)| json!({ "number": number, "title": title, "body": body, "state": "closed" }))
        .collect();
    Ok(Json(Value::Array(pulls)))
}

async fn get_issue(
    State(inner): State<Arc<Inner>>,
    headers: HeaderMap,
    Path((owner, name, number)): Path<(String, String, u64)>,
) -> Reply {
    let _g = gate(&inner, &headers, format!("/repos/{owner}/{name}/issues/{number}")).await?;
    let repo = find_repo(&inner, &owner, &name)?;
    let (n, title, body) = repo
        .issues
        .iter()
        .find(|(n, _, _)| *n == number)
        .ok_or_else(|| error(StatusCode::NOT_FOUND, "Not Found"))?;
    Ok(Json(json!({ "number": n, "title": title, "body": body, "state": "open" })))
}
