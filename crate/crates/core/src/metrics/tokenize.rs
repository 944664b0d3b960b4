use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// Lowercase word tokens of a message. Tokens are never empty and never
/// contain whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Builds a sequence from already-split tokens, dropping any that would
    /// break the token invariants (empty or containing whitespace).
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

fn is_edge_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{00AB}' | '\u{00BB}'
                | '\u{2013}' | '\u{2014}' | '\u{2026}' | '\u{00BF}' | '\u{00A1}'
        )
}

/// Lowercases, splits on Unicode whitespace, and strips punctuation from both
/// ends of every token. Interior punctuation (`retry-logic`, `v1.2`) is kept.
pub fn tokenize(text: &str) -> TokenSequence {
    TokenSequence(
        text.split_whitespace()
            .map(|raw| raw.trim_matches(is_edge_punctuation).to_lowercase())
            .filter(|t| !t.is_empty())
            .collect(),
    )
}
