use std::collections::HashMap;

use crate::scalar::Real;

/// Upper bound on memoized search states before the aligner settles for the
/// greedy alignment. Only reached with heavily repeated tokens.
const SEARCH_BUDGET: usize = 200_000;

/// Exact-match unigram alignment between a candidate and a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    pub matches: usize,
    pub chunks: usize,
}

struct Aligner<'a, S> {
    candidate: &'a [S],
    reference: &'a [S],
    /// Reference positions holding the same token, per candidate position.
    slots: Vec<Vec<usize>>,
    /// How many candidate positions of this token type may stay unmatched.
    slack: Vec<usize>,
    /// Occurrences of the same token type strictly before each candidate position.
    rank: Vec<usize>,
    memo: HashMap<(usize, Vec<u64>, Option<usize>), usize>,
    exhausted: bool,
}

impl<'a, S: AsRef<str>> Aligner<'a, S> {
    fn new(candidate: &'a [S], reference: &'a [S]) -> Self {
        let mut ref_positions: HashMap<&str, Vec<usize>> = HashMap::new();
        for (j, tok) in reference.iter().enumerate() {
            ref_positions.entry(tok.as_ref()).or_default().push(j);
        }
        let mut cand_count: HashMap<&str, usize> = HashMap::new();
        let mut rank = Vec::with_capacity(candidate.len());
        for tok in candidate {
            let c = cand_count.entry(tok.as_ref()).or_insert(0);
            rank.push(*c);
            *c += 1;
        }
        let slots: Vec<Vec<usize>> = candidate
            .iter()
            .map(|t| ref_positions.get(t.as_ref()).cloned().unwrap_or_default())
            .collect();
        let slack = candidate
            .iter()
            .zip(&slots)
            .map(|(t, s)| cand_count[t.as_ref()].saturating_sub(s.len()))
            .collect();
        Self {
            candidate,
            reference,
            slots,
            slack,
            rank,
            memo: HashMap::new(),
            exhausted: false,
        }
    }

    fn target_matches(&self) -> usize {
        let mut seen: HashMap<&str, (usize, usize)> = HashMap::new();
        for (t, s) in self.candidate.iter().zip(&self.slots) {
            let e = seen.entry(t.as_ref()).or_insert((0, s.len()));
            e.0 += 1;
        }
        seen.values().map(|&(c, r)| c.min(r)).sum()
    }

    fn is_used(used: &[u64], j: usize) -> bool {
        used[j / 64] & (1 << (j % 64)) != 0
    }

    fn set(used: &mut [u64], j: usize, on: bool) {
        if on {
            used[j / 64] |= 1 << (j % 64);
        } else {
            used[j / 64] &= !(1 << (j % 64));
        }
    }

    /// Fewest chunks for positions `i..` given the used reference slots and the
    /// reference position matched at `i - 1`. `None` if no completion reaches
    /// full cardinality; `Some(usize::MAX)` never escapes.
    fn search(&mut self, i: usize, used: &mut Vec<u64>, prev: Option<usize>) -> Option<usize> {
        if i == self.candidate.len() {
            return Some(0);
        }
        if self.exhausted {
            return None;
        }
        let key = (i, used.clone(), prev);
        if let Some(&v) = self.memo.get(&key) {
            return (v != usize::MAX).then_some(v);
        }
        if self.memo.len() >= SEARCH_BUDGET {
            self.exhausted = true;
            return None;
        }

        let mut best: Option<usize> = None;
        let slots = self.slots[i].clone();
        if !slots.is_empty() {
            let matched_of_type = slots.iter().filter(|&&j| Self::is_used(used, j)).count();
            let skipped_so_far = self.rank[i] - matched_of_type;
            // Try extending the current chunk first so good bounds come early.
            let mut order: Vec<usize> = slots.clone();
            if let Some(p) = prev {
                if let Some(pos) = order.iter().position(|&j| j == p + 1) {
                    order.swap(0, pos);
                }
            }
            for j in order {
                if Self::is_used(used, j) {
                    continue;
                }
                let cost = usize::from(prev.is_none_or(|p| p + 1 != j));
                Self::set(used, j, true);
                let rest = self.search(i + 1, used, Some(j));
                Self::set(used, j, false);
                if let Some(r) = rest {
                    best = Some(best.map_or(cost + r, |b| b.min(cost + r)));
                }
            }
            if skipped_so_far < self.slack[i] {
                if let Some(r) = self.search(i + 1, used, None) {
                    best = Some(best.map_or(r, |b| b.min(r)));
                }
            }
        } else if let Some(r) = self.search(i + 1, used, None) {
            best = Some(r);
        }

        if !self.exhausted {
            self.memo.insert(key, best.unwrap_or(usize::MAX));
        }
        best
    }

    fn greedy(&self) -> usize {
        let mut used = vec![false; self.reference.len()];
        let mut prev: Option<usize> = None;
        let mut chunks = 0;
        for slots in &self.slots {
            let pick = prev
                .map(|p| p + 1)
                .filter(|j| slots.contains(j) && !used[*j])
                .or_else(|| slots.iter().copied().find(|&j| !used[j]));
            match pick {
                Some(j) => {
                    if prev.is_none_or(|p| p + 1 != j) {
                        chunks += 1;
                    }
                    used[j] = true;
                    prev = Some(j);
                }
                None => prev = None,
            }
        }
        chunks
    }
}

/// Maximum-cardinality exact-match alignment with the fewest chunks.
///
/// A chunk is a maximal run of matches that are adjacent in both sequences.
/// If the search budget runs out (long inputs made of repeated tokens), the
/// greedy left-to-right alignment is used instead.
pub fn align<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Alignment {
    let mut aligner = Aligner::new(candidate, reference);
    let matches = aligner.target_matches();
    if matches == 0 {
        return Alignment { matches: 0, chunks: 0 };
    }
    let mut used = vec![0u64; reference.len().div_ceil(64)];
    let chunks = match aligner.search(0, &mut used, None) {
        Some(c) if !aligner.exhausted => c,
        _ => aligner.greedy(),
    };
    Alignment { matches, chunks }
}

/// METEOR with exact unigram matching only:
/// `Fmean = 10PR / (R + 9P)`, `penalty = 0.5 (chunks / matches)^3`,
/// `score = Fmean (1 - penalty)`.
pub fn meteor<T: Real, S: AsRef<str>>(candidate: &[S], reference: &[S]) -> T {
    if candidate.is_empty() || reference.is_empty() {
        return T::zero();
    }
    let Alignment { matches, chunks } = align(candidate, reference);
    if matches == 0 {
        return T::zero();
    }
    let m = T::count(matches);
    let p = m / T::count(candidate.len());
    let r = m / T::count(reference.len());
    let fmean = T::ten() * p * r / (r + T::nine() * p);
    let ch = T::count(chunks);
    let penalty = T::half() * (ch * ch * ch) / (m * m * m);
    fmean * (T::one() - penalty)
}
