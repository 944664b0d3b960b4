//! Blinded candidates and the mapping of display-indexed ratings back to
//! approaches.

use commitbench_core::submission::Criterion;
use commitbench_core::{ErrorKind, GenerationResult, LikertRatings, MetricScores, RatingRecord};
use serde::{Deserialize, Serialize};

use crate::session::PendingGeneration;

/// One result as shown to a rater: no approach name, no refinement flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindCandidate {
    pub display_index: usize,
    pub message: Option<String>,
    pub success: bool,
    pub error_kind: Option<ErrorKind>,
    pub scores: Option<MetricScores>,
}

pub fn blind_candidates(results: &[GenerationResult], order: &[usize]) -> Vec<BlindCandidate> {
    order
        .iter()
        .enumerate()
        .map(|(display_index, &i)| {
            let r = &results[i];
            BlindCandidate {
                display_index,
                message: r.message().map(str::to_owned),
                success: r.success(),
                error_kind: r.error_kind(),
                scores: r.scores().copied(),
            }
        })
        .collect()
}

/// A rater's input for the candidate at `display_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingInput {
    pub display_index: usize,
    #[serde(default)]
    pub likert: Option<LikertRatings>,
    #[serde(default)]
    pub rationale: String,
}

/// One record per result, in approach order. Every successful candidate
/// must be rated on all five criteria with a rationale; failed candidates
/// are recorded unrated. Violations are phrased in display indexes so they
/// never reveal which approach produced a candidate.
pub fn assemble_ratings(
    pending: &PendingGeneration,
    inputs: &[RatingInput],
) -> Result<Vec<RatingRecord>, Vec<String>> {
    let n = pending.order.len();
    let mut by_display: Vec<Option<&RatingInput>> = vec![None; n];
    let mut violations = Vec::new();
    for input in inputs {
        let d = input.display_index;
        match by_display.get_mut(d) {
            None => violations.push(format!("display_index {d} is out of range (0..{n})")),
            Some(Some(_)) => violations.push(format!("candidate {d} is rated more than once")),
            Some(slot) => *slot = Some(input),
        }
    }

    let mut records = Vec::with_capacity(n);
    for (i, result) in pending.results.iter().enumerate() {
        let d = pending
            .order
            .iter()
            .position(|&r| r == i)
            .expect("order is a permutation");
        let input = by_display[d];
        if result.success() {
            match input {
                None => violations.push(format!("candidate {d} is not rated")),
                Some(input) => {
                    match &input.likert {
                        None => violations.push(format!("candidate {d}: all five criteria must be rated")),
                        Some(l) => {
                            for c in Criterion::ALL {
                                let v = l.get(c);
                                if !(1..=5).contains(&v) {
                                    violations.push(format!("candidate {d}: {} = {v} is outside 1..=5", c.as_str()));
                                }
                            }
                        }
                    }
                    if input.rationale.trim().is_empty() {
                        violations.push(format!("candidate {d}: rationale must not be empty"));
                    }
                }
            }
        } else if input.is_some_and(|i| i.likert.is_some()) {
            violations.push(format!("candidate {d}: a failed generation cannot be rated"));
        }
        records.push(RatingRecord {
            approach_name: result.approach_name().to_owned(),
            generated_message: result.message().map(str::to_owned),
            success: result.success(),
            refinement_used: result.refinement_used(),
            likert: input.and_then(|i| i.likert),
            rationale: input.map(|i| i.rationale.trim().to_owned()).unwrap_or_default(),
            scores: result.scores().copied(),
        });
    }
    if violations.is_empty() {
        Ok(records)
    } else {
        Err(violations)
    }
}

#[cfg(test)]
mod tests {
    use chrono::Utc;
    use commitbench_core::pipeline::CandidateMessage;
    use commitbench_core::{Approach, CommitContext, CommitId, CommitType};

    use super::*;

    fn pending(order: Vec<usize>) -> PendingGeneration {
        let a = Approach::new("A", "[DIFF]", false);
        let b = Approach::new("B", "[DIFF]", true);
        let c = Approach::new("C", "[DIFF]", true);
        PendingGeneration {
            context: CommitContext {
                commit_id: CommitId::parse("abcdef0").unwrap(),
                repo: "o/r".into(),
                original_message: "Fix bug".into(),
                diff: String::new(),
                pr_title: None,
                issue_report: None,
                commit_type: CommitType::BugFix,
                timestamp: Utc::now(),
                files: vec![],
            },
            results: vec![
                GenerationResult::succeeded(&a, CandidateMessage::generated("Fix bug a"), None, false, "Fix bug"),
                GenerationResult::succeeded(&b, CandidateMessage::generated("Fix bug b"), None, true, "Fix bug"),
                GenerationResult::failed(&c, ErrorKind::BothInvalid, true, None),
            ],
            order,
        }
    }

    fn rate(d: usize, v: u8) -> RatingInput {
        RatingInput {
            display_index: d,
            likert: Some(LikertRatings::uniform(v)),
            rationale: format!("reason {v}"),
        }
    }

    #[test]
    fn maps_display_indexes_to_approaches() {
        let p = pending(vec![2, 0, 1]);
        let blind = blind_candidates(&p.results, &p.order);
        assert_eq!(blind[0].message, None);
        assert_eq!(blind[1].message.as_deref(), Some("Fix bug a"));
        let records = assemble_ratings(&p, &[rate(1, 5), rate(2, 3)]).unwrap();
        let names: Vec<_> = records.iter().map(|r| r.approach_name.as_str()).collect();
        assert_eq!(names, ["A", "B", "C"]);
        assert_eq!(records[0].likert, Some(LikertRatings::uniform(5)));
        assert_eq!(records[1].likert, Some(LikertRatings::uniform(3)));
        assert_eq!(records[2].likert, None);
        assert!(!records[2].success);
    }

    #[test]
    fn violations_use_display_indexes_only() {
        let p = pending(vec![1, 2, 0]);
        let mut missing = rate(0, 4);
        missing.rationale = "  ".into();
        let err = assemble_ratings(&p, &[missing, rate(1, 4), rate(7, 1), rate(0, 2)]).unwrap_err();
        assert!(err.iter().any(|v| v.contains("out of range")));
        assert!(err.iter().any(|v| v.contains("more than once")));
        assert!(err.iter().any(|v| v.contains("candidate 1: a failed generation")));
        assert!(err.iter().any(|v| v.contains("candidate 2 is not rated")));
        for v in &err {
            assert!(!v.contains('A') && !v.contains('B') && !v.contains('C'), "{v}");
        }
    }

    #[test]
    fn rejects_out_of_scale_values() {
        let p = pending(vec![0, 1, 2]);
        let err = assemble_ratings(&p, &[rate(0, 0), rate(1, 6)]).unwrap_err();
        assert_eq!(err.len(), 10);
    }
}
