//! Research-view password check and bearer tokens.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;

pub const DEFAULT_TOKEN_TTL: Duration = Duration::from_secs(8 * 60 * 60);

fn salted_digest(salt: &[u8], password: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(salt);
    h.update(password.as_bytes());
    h.finalize().into()
}

/// Holds only a salted hash of the configured password.
pub struct ResearchAuth {
    salt: [u8; 16],
    hash: [u8; 32],
    ttl: Duration,
    tokens: Mutex<HashMap<String, Instant>>,
}

impl std::fmt::Debug for ResearchAuth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResearchAuth").field("ttl", &self.ttl).finish_non_exhaustive()
    }
}

impl ResearchAuth {
    pub fn new(password: &str) -> Self {
        let salt: [u8; 16] = rand::random();
        Self {
            hash: salted_digest(&salt, password),
            salt,
            ttl: DEFAULT_TOKEN_TTL,
            tokens: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_ttl(mut self, ttl: Duration) -> Self {
        self.ttl = ttl;
        self
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn verify(&self, password: &str) -> bool {
        salted_digest(&self.salt, password).ct_eq(&self.hash).into()
    }

    /// A fresh bearer token if the password is right.
    pub fn login(&self, password: &str) -> Option<String> {
        if !self.verify(password) {
            return None;
        }
        let token = hex::encode(rand::random::<[u8; 32]>());
        let mut tokens = self.tokens.lock().expect("token lock");
        let now = Instant::now();
        tokens.retain(|_, expiry| *expiry > now);
        tokens.insert(token.clone(), now + self.ttl);
        Some(token)
    }

    pub fn check(&self, token: &str) -> bool {
        let tokens = self.tokens.lock().expect("token lock");
        let now = Instant::now();
        tokens
            .iter()
            .any(|(t, expiry)| *expiry > now && bool::from(t.as_bytes().ct_eq(token.as_bytes())))
    }
}
