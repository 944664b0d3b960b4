//! HTTP+JSON API under `/api`.
//!
//! Participant requests carry the session id in the `x-session-id` header.
//! Research requests carry `Authorization: Bearer <token>` from
//! `POST /api/research/login`.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use commitbench_clients::{Credentials, GithubClient};
use commitbench_core::export::ExportFormat;
use commitbench_core::pipeline::PipelineError;
use commitbench_core::store::{SubmissionFilter, SubmissionStore};
use commitbench_core::{Approach, ApproachRegistry, RefinementPrompt, Submission};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::auth::ResearchAuth;
use crate::blind::{assemble_ratings, blind_candidates, RatingInput};
use crate::error::ApiError;
use crate::session::{PendingGeneration, SessionManager, UnknownSession};
use crate::shuffle::{permutation, ShuffleSource};
use commitbench_core::Pipeline;

pub const SESSION_HEADER: &str = "x-session-id";

pub struct AppState {
    pub sessions: SessionManager,
    /// `None` when no research password is configured; research endpoints
    /// then answer `missing_config`.
    pub research: Option<ResearchAuth>,
    pub registry: RwLock<ApproachRegistry>,
    pub store: Arc<dyn SubmissionStore>,
    pub pipeline: Pipeline,
    pub github: GithubClient,
    pub consent_path: Option<PathBuf>,
    pub shuffle: ShuffleSource,
}

pub type SharedState = Arc<AppState>;

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/consent", get(get_consent))
        .route("/api/consent/accept", post(accept_consent))
        .route("/api/credentials", post(set_credentials))
        .route("/api/repos", get(list_repos))
        .route("/api/repos/{owner}/{name}/commits", get(list_commits))
        .route("/api/repos/{owner}/{name}/commits/{sha}", get(commit_detail))
        .route("/api/repos/{owner}/{name}/commits/{sha}/generate", post(generate))
        .route("/api/submissions", post(submit))
        .route("/api/research/login", post(research_login))
        .route("/api/research/approaches", get(list_approaches).post(add_approach))
        .route("/api/research/approaches/{name}", delete(remove_approach))
        .route("/api/research/approaches/{name}/refinement", put(set_refinement))
        .route(
            "/api/research/refinement-prompt",
            get(get_refinement_prompt).put(set_refinement_prompt),
        )
        .route("/api/research/submissions", get(list_submissions))
        .route("/api/research/export", get(export))
        .with_state(state)
}

type ApiResult<T> = Result<T, ApiError>;

impl From<UnknownSession> for ApiError {
    fn from(_: UnknownSession) -> Self {
        ApiError::UnknownSession
    }
}

fn session_id(headers: &HeaderMap) -> ApiResult<String> {
    headers
        .get(SESSION_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_owned)
        .ok_or(ApiError::UnknownSession)
}

impl AppState {
    /// The session id, if that session has accepted consent.
    fn unlocked(&self, headers: &HeaderMap) -> ApiResult<String> {
        let id = session_id(headers)?;
        if self.sessions.with(&id, |s| s.consent_accepted)? {
            Ok(id)
        } else {
            Err(ApiError::ConsentNotAccepted)
        }
    }

    fn credentials(&self, headers: &HeaderMap) -> ApiResult<(String, Credentials)> {
        let id = self.unlocked(headers)?;
        let creds = self
            .sessions
            .with(&id, |s| s.credentials.clone())?
            .ok_or(ApiError::CredentialsRequired)?;
        Ok((id, creds))
    }

    fn research(&self, headers: &HeaderMap) -> ApiResult<()> {
        let auth = self.research_auth()?;
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ApiError::Unauthorized)?;
        if auth.check(token.trim()) {
            Ok(())
        } else {
            Err(ApiError::Unauthorized)
        }
    }

    fn research_auth(&self) -> ApiResult<&ResearchAuth> {
        self.research.as_ref().ok_or_else(|| {
            ApiError::MissingConfig(format!(
                "research view disabled: {} is not set",
                crate::config::RESEARCH_PASSWORD_ENV
            ))
        })
    }

    fn registry_snapshot(&self) -> (Vec<Approach>, RefinementPrompt) {
        let r = self.registry.read().expect("registry lock");
        (r.list().to_vec(), r.refinement_prompt().clone())
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_session(State(st): State<SharedState>) -> (StatusCode, Json<Value>) {
    (StatusCode::CREATED, Json(json!({ "session_id": st.sessions.create() })))
}

/// Short content hash identifying a consent document revision.
pub fn consent_version(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

async fn get_consent(State(st): State<SharedState>, headers: HeaderMap) -> ApiResult<Json<Value>> {
    let path = st.consent_path.as_ref().ok_or_else(|| {
        ApiError::MissingConfig(format!(
            "no consent document configured; set {}",
            crate::config::CONSENT_PATH_ENV
        ))
    })?;
    let text = tokio::fs::read_to_string(path)
        .await
        .map_err(|e| ApiError::MissingConfig(format!("consent document {}: {e}", path.display())))?;
    let version = consent_version(&text);
    if headers.contains_key(SESSION_HEADER) {
        let id = session_id(&headers)?;
        st.sessions
            .with(&id, |s| s.consent_served = Some(version.clone()))?;
    }
    Ok(Json(json!({ "version": version, "text": text })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcceptBody {
    version: Option<String>,
}

async fn accept_consent(
    State(st): State<SharedState>,
    headers: HeaderMap,
    body: Option<Json<AcceptBody>>,
) -> ApiResult<Json<Value>> {
    let id = session_id(&headers)?;
    let wanted = body.and_then(|Json(b)| b.version);
    st.sessions.with(&id, |s| match (&s.consent_served, wanted) {
        (None, _) => Err(ApiError::ConsentNotServed),
        (Some(served), Some(v)) if *served != v => Err(ApiError::StaleConsent),
        (Some(_), _) => {
            s.consent_accepted = true;
            Ok(())
        }
    })??;
    Ok(Json(json!({ "consent_accepted": true })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CredentialsBody {
    token: String,
    username: String,
}

async fn set_credentials(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Json(body): Json<CredentialsBody>,
) -> ApiResult<StatusCode> {
    let id = st.unlocked(&headers)?;
    if body.token.trim().is_empty() || body.username.trim().is_empty() {
        return Err(ApiError::BadRequest("token and username must not be empty".into()));
    }
    let creds = Credentials::new(body.token.trim(), body.username.trim());
    st.sessions.with(&id, |s| s.credentials = Some(creds))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn list_repos(State(st): State<SharedState>, headers: HeaderMap) -> ApiResult<Json<Value>> {
    let (_, creds) = st.credentials(&headers)?;
    Ok(Json(json!(st.github.list_repositories(&creds).await?)))
}

#[derive(Deserialize)]
struct PageQuery {
    page: Option<u32>,
}

async fn list_commits(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Path((owner, name)): Path<(String, String)>,
    Query(q): Query<PageQuery>,
) -> ApiResult<Json<Value>> {
    let (_, creds) = st.credentials(&headers)?;
    let commits = st
        .github
        .list_commits(&creds, &format!("{owner}/{name}"), q.page.unwrap_or(1))
        .await?;
    Ok(Json(json!(commits)))
}

async fn commit_detail(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Path((owner, name, sha)): Path<(String, String, String)>,
) -> ApiResult<Json<Value>> {
    let (_, creds) = st.credentials(&headers)?;
    let ctx = st
        .github
        .get_commit_context(&creds, &format!("{owner}/{name}"), &sha)
        .await?;
    Ok(Json(json!(ctx)))
}

async fn generate(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Path((owner, name, sha)): Path<(String, String, String)>,
) -> ApiResult<Json<Value>> {
    let (id, creds) = st.credentials(&headers)?;
    let context = st
        .github
        .get_commit_context(&creds, &format!("{owner}/{name}"), &sha)
        .await?;
    let (approaches, refinement) = st.registry_snapshot();
    let results = st
        .pipeline
        .generate_for_commit(&context, &approaches, &refinement)
        .await
        .map_err(|e| match e {
            PipelineError::NoApproaches => ApiError::Conflict("no approaches are configured".into()),
            other => ApiError::Internal(other.to_string()),
        })?;

    let seed = st.shuffle.next_seed();
    let order = permutation(results.len(), seed);
    let candidates = blind_candidates(&results, &order);
    let generation_id = uuid::Uuid::new_v4().simple().to_string();
    let body = json!({
        "generation_id": generation_id,
        "commit_id": context.commit_id,
        "original_message": context.original_message,
        "shuffle_seed": seed,
        "shuffle_order": order,
        "candidates": candidates,
    });
    st.sessions.with(&id, |s| {
        s.add_generation(
            generation_id,
            PendingGeneration {
                context,
                results,
                order,
            },
        )
    })?;
    Ok(Json(body))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitBody {
    generation_id: String,
    ratings: Vec<RatingInput>,
}

async fn submit(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Json(body): Json<SubmitBody>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let id = st.unlocked(&headers)?;
    // Taken out of the session so concurrent submissions of one generation
    // cannot both be stored; put back if anything goes wrong.
    let pending = st
        .sessions
        .with(&id, |s| s.take_generation(&body.generation_id))?
        .ok_or(ApiError::StaleGeneration)?;
    let restore = |st: &AppState, pending: PendingGeneration| {
        let _ = st
            .sessions
            .with(&id, |s| s.add_generation(body.generation_id.clone(), pending));
    };

    let records = match assemble_ratings(&pending, &body.ratings) {
        Ok(r) => r,
        Err(violations) => {
            restore(&st, pending);
            return Err(ApiError::Validation(violations));
        }
    };
    let submission = Submission::from_context(&pending.context, records);
    let store = st.store.clone();
    let saved = tokio::task::spawn_blocking(move || store.save(&submission))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))
        .and_then(|r| r.map_err(ApiError::from));
    match saved {
        Ok(sid) => Ok((StatusCode::CREATED, Json(json!({ "submission_id": sid })))),
        Err(e) => {
            restore(&st, pending);
            Err(match e {
                // Record-level messages name approaches; keep raters blind.
                ApiError::Validation(_) => ApiError::Validation(vec!["submission failed validation".into()]),
                other => other,
            })
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoginBody {
    password: String,
}

async fn research_login(State(st): State<SharedState>, Json(body): Json<LoginBody>) -> ApiResult<Json<Value>> {
    let auth = st.research_auth()?;
    let token = auth.login(&body.password).ok_or(ApiError::Unauthorized)?;
    Ok(Json(json!({ "token": token, "expires_in_secs": auth.ttl().as_secs() })))
}

async fn list_approaches(State(st): State<SharedState>, headers: HeaderMap) -> ApiResult<Json<Value>> {
    st.research(&headers)?;
    let (approaches, _) = st.registry_snapshot();
    Ok(Json(json!({ "approaches": approaches })))
}

async fn add_approach(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Json(approach): Json<Approach>,
) -> ApiResult<(StatusCode, Json<Approach>)> {
    st.research(&headers)?;
    st.registry
        .write()
        .expect("registry lock")
        .add_approach(approach.clone())?;
    Ok((StatusCode::CREATED, Json(approach)))
}

async fn remove_approach(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Path(name): Path<String>,
) -> ApiResult<StatusCode> {
    st.research(&headers)?;
    st.registry.write().expect("registry lock").remove_approach(&name)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RefinementToggle {
    enabled: bool,
}

async fn set_refinement(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Path(name): Path<String>,
    Json(body): Json<RefinementToggle>,
) -> ApiResult<Json<Approach>> {
    st.research(&headers)?;
    let mut registry = st.registry.write().expect("registry lock");
    registry.set_refinement(&name, body.enabled)?;
    Ok(Json(registry.get(&name).expect("just updated").clone()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptBody {
    prompt: String,
}

async fn get_refinement_prompt(State(st): State<SharedState>, headers: HeaderMap) -> ApiResult<Json<Value>> {
    st.research(&headers)?;
    let (_, prompt) = st.registry_snapshot();
    Ok(Json(json!({ "prompt": prompt.as_str() })))
}

async fn set_refinement_prompt(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Json(body): Json<PromptBody>,
) -> ApiResult<Json<Value>> {
    st.research(&headers)?;
    let prompt = RefinementPrompt::new(body.prompt).map_err(|e| ApiError::Validation(vec![e.to_string()]))?;
    st.registry
        .write()
        .expect("registry lock")
        .set_refinement_prompt(prompt.clone())?;
    Ok(Json(json!({ "prompt": prompt.as_str() })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmissionQuery {
    repo: Option<String>,
    approach: Option<String>,
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
}

async fn list_submissions(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Query(q): Query<SubmissionQuery>,
) -> ApiResult<Json<Vec<Submission>>> {
    st.research(&headers)?;
    let filter = SubmissionFilter {
        repo: q.repo,
        approach: q.approach,
        from: q.from,
        to: q.to,
    };
    let store = st.store.clone();
    let subs = tokio::task::spawn_blocking(move || store.list(&filter))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(subs))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(st): State<SharedState>,
    headers: HeaderMap,
    Query(q): Query<ExportQuery>,
) -> ApiResult<Response> {
    st.research(&headers)?;
    let format: ExportFormat = q
        .format
        .as_deref()
        .unwrap_or("csv")
        .parse()
        .map_err(ApiError::BadRequest)?;
    let store = st.store.clone();
    let bytes = tokio::task::spawn_blocking(move || {
        let mut out = Vec::new();
        store.export(format, &mut out).map(|_| out)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    let (content_type, file) = match format {
        ExportFormat::Csv => ("text/csv; charset=utf-8", "submissions.csv"),
        ExportFormat::JsonLines => ("application/x-ndjson", "submissions.jsonl"),
    };
    Ok((
        [
            (header::CONTENT_TYPE, content_type.to_owned()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{file}\"")),
        ],
        bytes,
    )
        .into_response())
}
