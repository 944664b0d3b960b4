//! JSON error bodies: `{"error": code, "message": text}`, plus `violations`
//! for rejected submissions.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use commitbench_clients::GithubError;
use commitbench_core::registry::RegistryError;
use commitbench_core::store::StoreError;
use commitbench_core::ApproachError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("missing or unknown session; create one with POST /api/sessions")]
    UnknownSession,
    #[error("the consent document has not been served to this session")]
    ConsentNotServed,
    #[error("the consent document changed; fetch it again before accepting")]
    StaleConsent,
    #[error("consent has not been accepted for this session")]
    ConsentNotAccepted,
    #[error("GitHub credentials have not been provided for this session")]
    CredentialsRequired,
    #[error("research authentication failed")]
    Unauthorized,
    #[error("{0}")]
    MissingConfig(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("unknown or already submitted generation")]
    StaleGeneration,
    #[error("submission rejected")]
    Validation(Vec<String>),
    #[error("GitHub rate limit exceeded")]
    RateLimited,
    #[error("upstream error: {0}")]
    Upstream(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession | ApiError::CredentialsRequired | ApiError::Unauthorized => {
                StatusCode::UNAUTHORIZED
            }
            ApiError::ConsentNotAccepted => StatusCode::FORBIDDEN,
            ApiError::ConsentNotServed
            | ApiError::StaleConsent
            | ApiError::Conflict(_)
            | ApiError::StaleGeneration => StatusCode::CONFLICT,
            ApiError::MissingConfig(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::RateLimited => StatusCode::TOO_MANY_REQUESTS,
            ApiError::Upstream(_) => StatusCode::BAD_GATEWAY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::UnknownSession => "unknown_session",
            ApiError::ConsentNotServed => "consent_not_served",
            ApiError::StaleConsent => "stale_consent",
            ApiError::ConsentNotAccepted => "consent_not_accepted",
            ApiError::CredentialsRequired => "credentials_required",
            ApiError::Unauthorized => "unauthorized",
            ApiError::MissingConfig(_) => "missing_config",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::NotFound(_) => "not_found",
            ApiError::Conflict(_) => "conflict",
            ApiError::StaleGeneration => "stale_generation",
            ApiError::Validation(_) => "validation",
            ApiError::RateLimited => "rate_limited",
            ApiError::Upstream(_) => "upstream",
            ApiError::Internal(_) => "internal",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code(), "message": self.to_string() });
        if let ApiError::Validation(v) = &self {
            body["violations"] = json!(v);
        }
        (self.status(), Json(body)).into_response()
    }
}

impl From<GithubError> for ApiError {
    fn from(e: GithubError) -> Self {
        match e {
            GithubError::EmptyToken | GithubError::Auth => ApiError::CredentialsRequired,
            GithubError::RateLimited { .. } => ApiError::RateLimited,
            GithubError::NotFound(what) => ApiError::NotFound(what),
            GithubError::InvalidRepo(_) | GithubError::InvalidSha(_) => ApiError::BadRequest(e.to_string()),
            other => ApiError::Upstream(other.to_string()),
        }
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Approach(ApproachError::DuplicateName(n)) => {
                ApiError::Conflict(format!("approach {n:?} already exists"))
            }
            RegistryError::Approach(ApproachError::UnknownName(n)) => {
                ApiError::NotFound(format!("no approach named {n:?}"))
            }
            RegistryError::Approach(other) => ApiError::Validation(vec![other.to_string()]),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Validation(v) => ApiError::Validation(v.violations),
            other => ApiError::Internal(other.to_string()),
        }
    }
}
