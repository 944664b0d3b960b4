//! Server-side participant sessions. Credentials live here and nowhere else.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use commitbench_clients::Credentials;
use commitbench_core::{CommitContext, GenerationResult};

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(2 * 60 * 60);

/// Generations kept per session awaiting ratings; older ones are dropped.
pub const MAX_PENDING_GENERATIONS: usize = 16;

/// A generation shown to the participant and not yet rated.
#[derive(Debug, Clone)]
pub struct PendingGeneration {
    pub context: CommitContext,
    pub results: Vec<GenerationResult>,
    pub order: Vec<usize>,
}

#[derive(Debug)]
pub struct SessionState {
    /// Version of the consent document last served to this session.
    pub consent_served: Option<String>,
    pub consent_accepted: bool,
    pub credentials: Option<Credentials>,
    pending: HashMap<String, PendingGeneration>,
    pending_order: VecDeque<String>,
    last_seen: Instant,
}

impl SessionState {
    fn new() -> Self {
        Self {
            consent_served: None,
            consent_accepted: false,
            credentials: None,
            pending: HashMap::new(),
            pending_order: VecDeque::new(),
            last_seen: Instant::now(),
        }
    }

    pub fn add_generation(&mut self, id: String, generation: PendingGeneration) {
        while self.pending_order.len() >= MAX_PENDING_GENERATIONS {
            if let Some(old) = self.pending_order.pop_front() {
                self.pending.remove(&old);
            }
        }
        self.pending_order.push_back(id.clone());
        self.pending.insert(id, generation);
    }

    pub fn generation(&self, id: &str) -> Option<&PendingGeneration> {
        self.pending.get(id)
    }

    pub fn take_generation(&mut self, id: &str) -> Option<PendingGeneration> {
        self.pending_order.retain(|g| g != id);
        self.pending.remove(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("unknown or expired session")]
pub struct UnknownSession;

#[derive(Debug)]
pub struct SessionManager {
    ttl: Duration,
    sessions: Mutex<HashMap<String, SessionState>>,
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new(DEFAULT_SESSION_TTL)
    }
}

impl SessionManager {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn create(&self) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let mut sessions = self.sessions.lock().expect("session lock");
        let now = Instant::now();
        sessions.retain(|_, s| now.duration_since(s.last_seen) < self.ttl);
        sessions.insert(id.clone(), SessionState::new());
        id
    }

    /// Runs `f` on the live session `id`, refreshing its expiry.
    pub fn with<R>(&self, id: &str, f: impl FnOnce(&mut SessionState) -> R) -> Result<R, UnknownSession> {
        let mut sessions = self.sessions.lock().expect("session lock");
        let now = Instant::now();
        match sessions.get_mut(id) {
            Some(s) if now.duration_since(s.last_seen) < self.ttl => {
                s.last_seen = now;
                Ok(f(s))
            }
            Some(_) => {
                sessions.remove(id);
                Err(UnknownSession)
            }
            None => Err(UnknownSession),
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
