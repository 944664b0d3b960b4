use std::collections::HashMap;

use crate::scalar::Real;

/// Default highest n-gram order.
pub const DEFAULT_MAX_N: usize = 4;

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for window in tokens.windows(n) {
        let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram matches and the candidate's total n-gram count for order `n`.
pub(crate) fn clipped_precision_counts<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    n: usize,
) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let matched = cand
        .iter()
        .map(|(gram, &c)| c.min(refs.get(gram).copied().unwrap_or(0)))
        .sum();
    let total = candidate.len().saturating_sub(n - 1);
    (matched, total)
}

/// Sentence-level BLEU with brevity penalty.
///
/// Unigram precision is never smoothed, so zero unigram overlap scores 0.
/// For orders `n >= 2` a zero match count is replaced by `1 / (total + 1)`;
/// non-zero counts are used as-is so identical inputs score exactly 1.
/// Empty candidate or reference scores 0. `max_n` below 1 is treated as 1.
pub fn bleu<T: Real, S: AsRef<str>>(candidate: &[S], reference: &[S], max_n: usize) -> T {
    if candidate.is_empty() || reference.is_empty() {
        return T::zero();
    }
    let max_n = max_n.max(1);

    let mut log_sum = T::zero();
    for n in 1..=max_n {
        let (matched, total) = clipped_precision_counts(candidate, reference, n);
        let precision = if matched > 0 {
            T::count(matched) / T::count(total)
        } else if n == 1 {
            return T::zero();
        } else {
            T::one() / T::count(total + 1)
        };
        log_sum = log_sum + precision.ln();
    }
    let geo_mean = (log_sum / T::count(max_n)).exp();

    let c = candidate.len();
    let r = reference.len();
    let brevity = if c >= r {
        T::one()
    } else {
        (T::one() - T::count(r) / T::count(c)).exp()
    };

    (brevity * geo_mean).min(T::one()).max(T::zero())
}
