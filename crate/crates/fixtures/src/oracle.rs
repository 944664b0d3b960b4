//! Brute-force reference implementations of the text metrics. These share no
//! code with the production metrics and favour obviousness over speed;
//! keep inputs short (at most ~12 tokens).

fn is_subsequence(needle: &[&str], hay: &[&str]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Longest common subsequence by enumerating every subset of `a`.
pub fn lcs_exhaustive(a: &[&str], b: &[&str]) -> usize {
    assert!(a.len() <= 20, "oracle input too long");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked: Vec<&str> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
        if is_subsequence(&picked, b) {
            best = size;
        }
    }
    best
}

pub fn rouge_l_oracle(c: &[&str], r: &[&str]) -> f64 {
    let l = lcs_exhaustive(c, r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / c.len() as f64;
    let rec = l / r.len() as f64;
    2.0 * p * rec / (p + rec)
}

fn occurrences(seq: &[&str], gram: &[&str]) -> usize {
    if gram.len() > seq.len() {
        return 0;
    }
    (0..=seq.len() - gram.len())
        .filter(|&i| &seq[i..i + gram.len()] == gram)
        .count()
}

/// Sentence BLEU by direct clipped counting. Orders `n >= 2` with zero
/// matches use `1 / (total + 1)`; zero unigram matches score 0.
pub fn bleu_oracle(c: &[&str], r: &[&str], max_n: usize) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 1..=max_n {
        let total = if c.len() >= n { c.len() - n + 1 } else { 0 };
        let mut seen: Vec<&[&str]> = Vec::new();
        let mut matched = 0;
        for i in 0..total {
            let gram = &c[i..i + n];
            if seen.contains(&gram) {
                continue;
            }
            seen.push(gram);
            matched += occurrences(c, gram).min(occurrences(r, gram));
        }
        let p = if matched > 0 {
            matched as f64 / total as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (total as f64 + 1.0)
        };
        product *= p;
    }
    let bp = if c.len() >= r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    bp * product.powf(1.0 / max_n as f64)
}

fn chunk_count(pairs: &[(usize, usize)]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    1 + pairs
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

fn enumerate(
    c: &[&str],
    r: &[&str],
    i: usize,
    used: &mut Vec<bool>,
    pairs: &mut Vec<(usize, usize)>,
    best: &mut (usize, usize),
) {
    if i == c.len() {
        let m = pairs.len();
        let ch = chunk_count(pairs);
        if m > best.0 || (m == best.0 && ch < best.1) {
            *best = (m, ch);
        }
        return;
    }
    enumerate(c, r, i + 1, used, pairs, best);
    for j in 0..r.len() {
        if !used[j] && r[j] == c[i] {
            used[j] = true;
            pairs.push((i, j));
            enumerate(c, r, i + 1, used, pairs, best);
            pairs.pop();
            used[j] = false;
        }
    }
}

/// `(matches, chunks)` of the maximum-cardinality alignment with the fewest
/// chunks, found by enumerating every alignment.
pub fn meteor_alignment_oracle(c: &[&str], r: &[&str]) -> (usize, usize) {
    let mut best = (0, usize::MAX);
    enumerate(c, r, 0, &mut vec![false; r.len()], &mut Vec::new(), &mut best);
    if best.0 == 0 {
        (0, 0)
    } else {
        best
    }
}

pub fn meteor_oracle(c: &[&str], r: &[&str]) -> f64 {
    let (m, ch) = meteor_alignment_oracle(c, r);
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    let p = m / c.len() as f64;
    let rec = m / r.len() as f64;
    let fmean = 10.0 * p * rec / (rec + 9.0 * p);
    fmean * (1.0 - 0.5 * (ch as f64 / m).powi(3))
}
