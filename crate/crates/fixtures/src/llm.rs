//! Mock OpenAI-compatible chat-completion endpoint.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum MockReply {
    /// 200 with one choice carrying this content.
    Content(String),
    /// Non-2xx status with an error body.
    Status(u16),
    /// 200 with an empty `choices` array.
    EmptyChoices,
    /// Waits before answering with the inner reply.
    Stall(Duration, Box<MockReply>),
}

impl MockReply {
    pub fn content(s: impl Into<String>) -> Self {
        Self::Content(s.into())
    }
}

#[derive(Debug, Clone)]
pub struct CapturedCall {
    pub path: String,
    pub authorization: Option<String>,
    pub body: Value,
}

impl CapturedCall {
    pub fn model(&self) -> Option<&str> {
        self.body.get("model").and_then(Value::as_str)
    }

    pub fn prompt(&self) -> Option<&str> {
        self.body
            .get("messages")
            .and_then(|m| m.get(0))
            .and_then(|m| m.get("content"))
            .and_then(Value::as_str)
    }
}

type Responder = dyn Fn(&str, usize) -> MockReply + Send + Sync;

struct Inner {
    responder: Box<Responder>,
    calls: Mutex<Vec<CapturedCall>>,
}

#[derive(Clone)]
pub struct MockLlm {
    addr: SocketAddr,
    inner: Arc<Inner>,
}

impl MockLlm {
    /// `responder(prompt, call_index)` decides each reply. Must be called
    /// inside a tokio runtime.
    pub async fn start<F>(responder: F) -> Self
    where
        F: Fn(&str, usize) -> MockReply + Send + Sync + 'static,
    {
        let inner = Arc::new(Inner {
            responder: Box::new(responder),
            calls: Mutex::new(Vec::new()),
        });
        let app = Router::new()
            .route("/v1/chat/completions", post(complete))
            .route("/chat/completions", post(complete))
            .with_state(Arc::clone(&inner));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        Self { addr, inner }
    }

    /// Answers every prompt with `content`.
    pub async fn constant(content: &str) -> Self {
        let content = content.to_owned();
        Self::start(move |_, _| MockReply::Content(content.clone())).await
    }

    /// Base URL including the `/v1` prefix.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn calls(&self) -> Vec<CapturedCall> {
        self.inner.calls.lock().unwrap().clone()
    }
}

fn render(reply: MockReply) -> Response {
    match reply {
        MockReply::Content(c) => Json(json!({
            "id": "gen-1",
            "object": "chat.completion",
            "choices": [{ "index": 0, "message": { "role": "assistant", "content": c }, "finish_reason": "stop" }]
        }))
        .into_response(),
        MockReply::Status(code) => (
            StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            Json(json!({ "error": { "message": "mock failure", "code": code } })),
        )
            .into_response(),
        MockReply::EmptyChoices => Json(json!({ "id": "gen-1", "choices": [] })).into_response(),
        MockReply::Stall(..) => unreachable!("stall is unwrapped before rendering"),
    }
}

async fn complete(State(inner): State<Arc<Inner>>, headers: HeaderMap, Json(body): Json<Value>) -> Response {
    let prompt = body
        .get("messages")
        .and_then(|m| m.get(0))
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_owned();
    let index = {
        let mut calls = inner.calls.lock().unwrap();
        calls.push(CapturedCall {
            path: "/chat/completions".into(),
            authorization: headers
                .get("authorization")
                .and_then(|v| v.to_str().ok())
                .map(str::to_owned),
            body,
        });
        calls.len() - 1
    };
    let mut reply = (inner.responder)(&prompt, index);
    while let MockReply::Stall(d, next) = reply {
        tokio::time::sleep(d).await;
        reply = *next;
    }
    render(reply)
}
