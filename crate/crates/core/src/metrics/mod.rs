//! Sentence-level BLEU, METEOR, and ROUGE-L over lowercase word tokens.
//!
//! All metrics are pure functions that return a value in `[0, 1]` and map
//! degenerate inputs (either side empty, no overlap) to 0 instead of erroring.
//! They are generic over the float type; [`crate::MetricScores`] is the `f64`
//! instantiation used by the rest of the crate.

mod bleu;
mod meteor;
mod rouge;
mod tokenize;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

pub use bleu::{bleu, DEFAULT_MAX_N};
pub use meteor::{align, meteor, Alignment};
pub use rouge::{lcs_len, rouge_l};
pub use tokenize::{tokenize, TokenSequence};

/// BLEU, METEOR, and ROUGE-L for one (original, generated) pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores<T> {
    pub bleu: T,
    pub meteor: T,
    pub rouge_l: T,
}

impl<T: Real> Scores<T> {
    /// Scores a candidate token sequence against a reference.
    pub fn compute(candidate: &TokenSequence, reference: &TokenSequence) -> Self {
        Self {
            bleu: bleu(candidate.as_slice(), reference.as_slice(), DEFAULT_MAX_N),
            meteor: meteor(candidate.as_slice(), reference.as_slice()),
            rouge_l: rouge_l(candidate.as_slice(), reference.as_slice()),
        }
    }

    pub fn in_unit_range(&self) -> bool {
        [self.bleu, self.meteor, self.rouge_l]
            .iter()
            .all(|v| v.is_finite() && *v >= T::zero() && *v <= T::one())
    }
}

/// Tokenizes both messages and scores `generated` (candidate) against
/// `original` (reference).
pub fn score_all<T: Real>(original: &str, generated: &str) -> Scores<T> {
    Scores::compute(&tokenize(generated), &tokenize(original))
}
