use commitbench_core::metrics::{align, bleu, lcs_len, meteor, rouge_l, score_all, tokenize, Alignment};
use commitbench_core::MetricScores;
use commitbench_fixtures::oracle::{
    bleu_oracle, lcs_exhaustive, meteor_alignment_oracle, meteor_oracle, rouge_l_oracle,
};
use proptest::prelude::*;

const VOCAB: [&str; 5] = ["fix", "add", "bug", "parser", "test"];

fn seq(max: usize) -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(&VOCAB[..]), 0..=max)
}

#[test]
fn bleu_worked_example() {
    let c = ["fix", "null", "pointer", "in", "parser"];
    let r = ["fix", "parser", "null", "pointer"];
    // p1 = 4/5, p2 = 1/4, p3 = 0 -> 1/4, p4 = 0 -> 1/3, BP = 1 (c > r)
    let expected = 0.359_304_111_963_084_26;
    let got: f64 = bleu(&c, &r, 4);
    assert!((got - expected).abs() < 1e-9, "{got}");
    assert!((bleu_oracle(&c, &r, 4) - expected).abs() < 1e-12);
}

#[test]
fn rouge_worked_example() {
    let c = ["fix", "bug", "in", "parser"];
    let r = ["fix", "parser", "bug"];
    assert_eq!(lcs_exhaustive(&c, &r), 2);
    let got: f64 = rouge_l(&c, &r);
    assert!((got - 4.0 / 7.0).abs() < 1e-15);
    assert!(got < 1.0);
}

#[test]
fn score_all_examples() {
    let same: MetricScores = score_all("Fix bug", "Fix bug");
    assert_eq!((same.bleu, same.rouge_l), (1.0, 1.0));
    assert!((same.meteor - 0.9375).abs() < 1e-12);

    let empty: MetricScores = score_all("", "anything");
    assert_eq!(empty, MetricScores::default());

    let disjoint: MetricScores = score_all("Add retry logic to client", "Introduce caching layer");
    let c = ["introduce", "caching", "layer"];
    let r = ["add", "retry", "logic", "to", "client"];
    assert_eq!(disjoint.bleu, bleu_oracle(&c, &r, 4));
    assert_eq!(disjoint.meteor, meteor_oracle(&c, &r));
    assert_eq!(disjoint.rouge_l, rouge_l_oracle(&c, &r));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn rouge_matches_exhaustive_lcs(c in seq(8), r in seq(8)) {
        prop_assert_eq!(lcs_len(&c, &r), lcs_exhaustive(&c, &r));
        let got: f64 = rouge_l(&c, &r);
        prop_assert!((got - rouge_l_oracle(&c, &r)).abs() < 1e-9);
    }

    #[test]
    fn bleu_matches_direct_counting(c in seq(8), r in seq(8), max_n in 1usize..=4) {
        let got: f64 = bleu(&c, &r, max_n);
        prop_assert!((got - bleu_oracle(&c, &r, max_n)).abs() < 1e-9, "{} vs {}", got, bleu_oracle(&c, &r, max_n));
    }

    #[test]
    fn meteor_alignment_is_optimal(c in seq(7), r in seq(7)) {
        let Alignment { matches, chunks } = align(&c, &r);
        prop_assert_eq!((matches, chunks), meteor_alignment_oracle(&c, &r));
        let got: f64 = meteor(&c, &r);
        prop_assert!((got - meteor_oracle(&c, &r)).abs() < 1e-12);
    }

    #[test]
    fn range_and_finiteness(a in ".{0,60}", b in ".{0,60}") {
        let s: MetricScores = score_all(&a, &b);
        prop_assert!(s.in_unit_range());
        let s32: commitbench_core::MetricScoresF32 = score_all(&a, &b);
        prop_assert!(s32.in_unit_range());
    }

    #[test]
    fn identity(s in prop::collection::vec(prop::sample::select(&VOCAB[..]), 1..=10)) {
        prop_assert_eq!(bleu::<f64, _>(&s, &s, 4), 1.0);
        prop_assert_eq!(rouge_l::<f64, _>(&s, &s), 1.0);
        let n = s.len() as f64;
        prop_assert_eq!(meteor::<f64, _>(&s, &s), 1.0 - 0.5 / (n * n * n));
    }

    #[test]
    fn zero_overlap_scores_zero(c in seq(6)) {
        let r = ["alpha", "beta", "gamma"];
        prop_assert_eq!(bleu::<f64, _>(&c, &r, 4), 0.0);
        prop_assert_eq!(rouge_l::<f64, _>(&c, &r), 0.0);
        prop_assert_eq!(meteor::<f64, _>(&c, &r), 0.0);
    }

    #[test]
    fn deterministic(a in ".{0,40}", b in ".{0,40}") {
        let x: MetricScores = score_all(&a, &b);
        let y: MetricScores = score_all(&a, &b);
        prop_assert_eq!(x.bleu.to_bits(), y.bleu.to_bits());
        prop_assert_eq!(x.meteor.to_bits(), y.meteor.to_bits());
        prop_assert_eq!(x.rouge_l.to_bits(), y.rouge_l.to_bits());
    }

    #[test]
    fn tokens_are_clean(text in "\\PC{0,80}") {
        for t in tokenize(&text).iter() {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace));
        }
    }
}
