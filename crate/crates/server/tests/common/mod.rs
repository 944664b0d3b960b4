#![allow(dead_code)]

use std::path::PathBuf;

use commitbench_core::{Approach, ApproachRegistry};
use commitbench_fixtures::sample::{widgets_repo, TOKEN, USERNAME};
use commitbench_fixtures::{MockGithub, MockLlm, MockReply};
use commitbench_server::cli::{build_state, serve_on};
use commitbench_server::config::{
    Env, API_KEY_ENV, CONSENT_PATH_ENV, DATA_DIR_ENV, GITHUB_TOKEN_ENV, GITHUB_USERNAME_ENV,
    RESEARCH_PASSWORD_ENV,
};
use commitbench_server::shuffle::ShuffleSource;
use commitbench_server::AppState;
use serde_json::{json, Value};
use tempfile::TempDir;
use tokio::sync::oneshot;

pub const PASSWORD: &str = "correct horse battery staple";
pub const API_KEY: &str = "sk-fixture-key";
pub const TERSE_MARKER: &str = "TERSE-STYLE";
pub const DEFAULT_REPLY: &str = "Fix overflow in token parser offsets";
pub const TERSE_REPLY: &str = "Guard parser offset addition";
pub const CONSENT_V1: &str = "# Consent\n\nYou agree to rate messages.\n";

/// Replies by approach: the terse template gets a short message, anything
/// else (including the refinement prompt) the default message, so the
/// refinement agent echoes the draft.
pub fn by_approach(prompt: &str, _: usize) -> MockReply {
    if prompt.contains(TERSE_MARKER) {
        MockReply::content(TERSE_REPLY)
    } else {
        MockReply::content(DEFAULT_REPLY)
    }
}

pub fn terse_approach() -> Approach {
    Approach::new(
        "Terse",
        format!("{TERSE_MARKER} One short line for this diff:\n[DIFF]"),
        false,
    )
}

pub struct Fixture {
    pub github: MockGithub,
    pub llm: MockLlm,
    pub config: TempDir,
    pub data: TempDir,
}

impl Fixture {
    pub async fn start() -> Self {
        Self::with_llm(MockLlm::start(by_approach).await).await
    }

    /// Mock GitHub with the widgets repo, `llm`, and a config directory
    /// holding the seeded Default approach plus Terse.
    pub async fn with_llm(llm: MockLlm) -> Self {
        let github = MockGithub::start(TOKEN, vec![widgets_repo()]).await;
        let config = tempfile::tempdir().unwrap();
        let data = tempfile::tempdir().unwrap();
        let mut registry = ApproachRegistry::open(config.path()).unwrap();
        registry.add_approach(terse_approach()).unwrap();
        std::fs::write(
            config.path().join("service.toml"),
            format!(
                "[llm]\nbase_url = \"{}\"\nmodel_id = \"fixture/model\"\n\n\
                 [github]\nbase_url = \"{}\"\n\n[retry]\nmax_attempts = 3\ndelay_ms = 0\n",
                llm.base_url(),
                github.base_url()
            ),
        )
        .unwrap();
        std::fs::write(config.path().join("consent.md"), CONSENT_V1).unwrap();
        Self {
            github,
            llm,
            config,
            data,
        }
    }

    pub fn consent_path(&self) -> PathBuf {
        self.config.path().join("consent.md")
    }

    pub fn env(&self) -> Env {
        Env::from_pairs([
            (API_KEY_ENV, API_KEY.to_owned()),
            (RESEARCH_PASSWORD_ENV, PASSWORD.to_owned()),
            (DATA_DIR_ENV, self.data.path().display().to_string()),
            (CONSENT_PATH_ENV, self.consent_path().display().to_string()),
            (GITHUB_TOKEN_ENV, TOKEN.to_owned()),
            (GITHUB_USERNAME_ENV, USERNAME.to_owned()),
        ])
    }

    pub fn state(&self, shuffle_seed: u64) -> AppState {
        let mut state = build_state(self.config.path(), &self.env()).unwrap();
        state.shuffle = ShuffleSource::seeded(shuffle_seed);
        state
    }

    pub async fn serve(&self, shuffle_seed: u64) -> Server {
        Server::start(self.state(shuffle_seed)).await
    }
}

pub struct Server {
    pub base: String,
    pub http: reqwest::Client,
    stop: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl Server {
    pub async fn start(state: AppState) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = oneshot::channel();
        let task = tokio::spawn(serve_on(listener, state, async {
            let _ = rx.await;
        }));
        Self {
            base,
            http: reqwest::Client::new(),
            stop: Some(tx),
            task: Some(task),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn shutdown(mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            task.await.unwrap().unwrap();
        }
    }

    pub async fn get(&self, path: &str, session: Option<&str>) -> (u16, Value) {
        let mut req = self.http.get(self.url(path));
        if let Some(s) = session {
            req = req.header("x-session-id", s);
        }
        read(req.send().await.unwrap()).await
    }

    pub async fn post(&self, path: &str, session: Option<&str>, body: Value) -> (u16, Value) {
        let mut req = self.http.post(self.url(path)).json(&body);
        if let Some(s) = session {
            req = req.header("x-session-id", s);
        }
        read(req.send().await.unwrap()).await
    }

    pub async fn research(&self, method: reqwest::Method, path: &str, token: &str, body: Option<Value>) -> (u16, Value) {
        let mut req = self.http.request(method, self.url(path)).bearer_auth(token);
        if let Some(b) = body {
            req = req.json(&b);
        }
        read(req.send().await.unwrap()).await
    }

    pub async fn new_session(&self) -> String {
        let (status, body) = self.post("/api/sessions", None, json!({})).await;
        assert_eq!(status, 201);
        body["session_id"].as_str().unwrap().to_owned()
    }

    /// A session that has accepted consent and supplied credentials.
    pub async fn unlocked_session(&self) -> String {
        let s = self.new_session().await;
        let (status, _) = self.get("/api/consent", Some(&s)).await;
        assert_eq!(status, 200);
        let (status, _) = self.post("/api/consent/accept", Some(&s), json!({})).await;
        assert_eq!(status, 200);
        let (status, _) = self
            .post("/api/credentials", Some(&s), json!({ "token": TOKEN, "username": USERNAME }))
            .await;
        assert_eq!(status, 204);
        s
    }

    pub async fn login(&self) -> String {
        let (status, body) = self
            .post("/api/research/login", None, json!({ "password": PASSWORD }))
            .await;
        assert_eq!(status, 200, "{body}");
        body["token"].as_str().unwrap().to_owned()
    }
}

pub async fn read(resp: reqwest::Response) -> (u16, Value) {
    let status = resp.status().as_u16();
    let text = resp.text().await.unwrap();
    let body = if text.is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&text).unwrap_or(Value::String(text))
    };
    (status, body)
}

/// Ratings for every successful candidate, keyed to what each shows: the
/// score depends only on the message, so the association is checkable.
pub fn ratings_for(generation: &Value) -> Value {
    let ratings: Vec<Value> = generation["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["success"].as_bool().unwrap())
        .map(|c| {
            let msg = c["message"].as_str().unwrap();
            let v = if msg == TERSE_REPLY { 2 } else { 5 };
            json!({
                "display_index": c["display_index"],
                "likert": {
                    "accuracy": v, "integrity": v, "readability": v,
                    "applicability": v, "completeness": v
                },
                "rationale": format!("rated {v} for {msg}"),
            })
        })
        .collect();
    json!({ "generation_id": generation["generation_id"], "ratings": ratings })
}
