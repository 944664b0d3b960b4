use crate::scalar::Real;

/// Length of the longest common subsequence, O(|a|·|b|) time, O(|b|) space.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1: harmonic mean of LCS precision (over the candidate) and LCS
/// recall (over the reference).
pub fn rouge_l<T: Real, S: AsRef<str>>(candidate: &[S], reference: &[S]) -> T {
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return T::zero();
    }
    let p = T::count(lcs) / T::count(candidate.len());
    let r = T::count(lcs) / T::count(reference.len());
    T::two() * p * r / (p + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity() {
        let s = v("fix null pointer in parser");
        assert_eq!(rouge_l::<f64, _>(&s, &s), 1.0);
    }

    #[test]
    fn disjoint() {
        assert_eq!(rouge_l::<f64, _>(&v("a"), &v("b")), 0.0);
    }

    #[test]
    fn permuted_pair() {
        let c = v("fix bug in parser");
        let r = v("fix parser bug");
        assert_eq!(lcs_len(&c, &r), 2);
        // P = 2/4, R = 2/3, F1 = 2PR/(P+R) = 4/7
        let f: f64 = rouge_l(&c, &r);
        assert!((f - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn empty() {
        let e: Vec<&str> = vec![];
        assert_eq!(rouge_l::<f64, _>(&e, &v("a")), 0.0);
        assert_eq!(rouge_l::<f64, _>(&e, &e), 0.0);
    }
}
