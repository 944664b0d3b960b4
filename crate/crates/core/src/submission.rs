//! Human-evaluation records.

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::commit::{CommitContext, CommitId, CommitType, FileChange};
use crate::MetricScores;

/// 128-bit random id rendered as 32 lowercase hex digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SubmissionId(String);

impl SubmissionId {
    pub fn random() -> Self {
        Self(uuid::Uuid::new_v4().simple().to_string())
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        if s.len() == 32 && s.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
            Ok(Self(s.to_owned()))
        } else {
            Err(format!("invalid submission id {s:?}"))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SubmissionId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Self::parse(&s)
    }
}

impl From<SubmissionId> for String {
    fn from(id: SubmissionId) -> String {
        id.0
    }
}

impl fmt::Display for SubmissionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Accuracy,
    Integrity,
    Readability,
    Applicability,
    Completeness,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Accuracy,
        Criterion::Integrity,
        Criterion::Readability,
        Criterion::Applicability,
        Criterion::Completeness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Accuracy => "accuracy",
            Criterion::Integrity => "integrity",
            Criterion::Readability => "readability",
            Criterion::Applicability => "applicability",
            Criterion::Completeness => "completeness",
        }
    }
}

/// Five-point ratings, one per criterion. Values outside 1..=5 deserialize
/// but fail [`Submission::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikertRatings {
    pub accuracy: u8,
    pub integrity: u8,
    pub readability: u8,
    pub applicability: u8,
    pub completeness: u8,
}

impl LikertRatings {
    pub fn uniform(value: u8) -> Self {
        Self {
            accuracy: value,
            integrity: value,
            readability: value,
            applicability: value,
            completeness: value,
        }
    }

    pub fn get(&self, c: Criterion) -> u8 {
        match c {
            Criterion::Accuracy => self.accuracy,
            Criterion::Integrity => self.integrity,
            Criterion::Readability => self.readability,
            Criterion::Applicability => self.applicability,
            Criterion::Completeness => self.completeness,
        }
    }
}

/// One rater's verdict on one approach's output.
///
/// Failed generations are recorded too: `success = false`, no message, no
/// ratings, no scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub approach_name: String,
    pub generated_message: Option<String>,
    pub success: bool,
    pub refinement_used: bool,
    pub likert: Option<LikertRatings>,
    #[serde(default)]
    pub rationale: String,
    pub scores: Option<MetricScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub submission_id: SubmissionId,
    pub repo: String,
    pub commit_id: CommitId,
    pub commit_type: CommitType,
    pub issue_report: Option<String>,
    pub original_message: String,
    pub pr_title: Option<String>,
    pub commit_timestamp: DateTime<Utc>,
    pub files: Vec<FileChange>,
    pub ratings: Vec<RatingRecord>,
    pub created_at: DateTime<Utc>,
}

/// Every invariant a submission violates.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid submission: {}", violations.join("; "))]
pub struct ValidationError {
    pub violations: Vec<String>,
}

impl Submission {
    /// A fresh submission for `ctx` with a random id, stamped now.
    pub fn from_context(ctx: &CommitContext, ratings: Vec<RatingRecord>) -> Self {
        Self {
            submission_id: SubmissionId::random(),
            repo: ctx.repo.clone(),
            commit_id: ctx.commit_id.clone(),
            commit_type: ctx.commit_type,
            issue_report: ctx.issue_report.clone(),
            original_message: ctx.original_message.clone(),
            pr_title: ctx.pr_title.clone(),
            commit_timestamp: ctx.timestamp,
            files: ctx.files.clone(),
            ratings,
            created_at: Utc::now(),
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut v = Vec::new();
        if self.ratings.is_empty() {
            v.push("ratings must not be empty".to_owned());
        }
        let mut seen = HashSet::new();
        for (i, r) in self.ratings.iter().enumerate() {
            let at = format!("ratings[{i}] ({})", r.approach_name);
            if r.approach_name.trim().is_empty() {
                v.push(format!("{at}: approach_name is empty"));
            }
            if !seen.insert(r.approach_name.as_str()) {
                v.push(format!("{at}: duplicate rating for approach"));
            }
            if r.success {
                if r.generated_message.as_deref().is_none_or(|m| m.trim().is_empty()) {
                    v.push(format!("{at}: successful rating needs a generated_message"));
                }
                match &r.likert {
                    None => v.push(format!("{at}: all five criteria must be rated")),
                    Some(l) => {
                        for c in Criterion::ALL {
                            let value = l.get(c);
                            if !(1..=5).contains(&value) {
                                v.push(format!("{at}: {} = {value} is outside 1..=5", c.as_str()));
                            }
                        }
                    }
                }
                if r.rationale.trim().is_empty() {
                    v.push(format!("{at}: rationale must not be empty"));
                }
            } else {
                if r.generated_message.is_some() {
                    v.push(format!("{at}: failed generation cannot carry a message"));
                }
                if r.likert.is_some() {
                    v.push(format!("{at}: failed generation cannot be rated"));
                }
                if r.scores.is_some() {
                    v.push(format!("{at}: failed generation cannot carry scores"));
                }
            }
            if r.scores.is_some_and(|s| !s.in_unit_range()) {
                v.push(format!("{at}: metric scores must be finite and within [0, 1]"));
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations: v })
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use chrono::TimeZone;

    use super::*;
    use crate::commit::FileStatus;
    use crate::metrics::Scores;

    pub(crate) fn rating(name: &str) -> RatingRecord {
        RatingRecord {
            approach_name: name.into(),
            generated_message: Some("Fix parser crash".into()),
            success: true,
            refinement_used: true,
            likert: Some(LikertRatings::uniform(4)),
            rationale: "clear and accurate".into(),
            scores: Some(Scores {
                bleu: 0.5,
                meteor: 0.4,
                rouge_l: 0.6,
            }),
        }
    }

    pub(crate) fn fixture(ratings: Vec<RatingRecord>) -> Submission {
        Submission {
            submission_id: SubmissionId::random(),
            repo: "octo/widgets".into(),
            commit_id: CommitId::parse("0123456789abcdef0123456789abcdef01234567").unwrap(),
            commit_type: CommitType::BugFix,
            issue_report: Some("Crash on empty input".into()),
            original_message: "Fix crash in parser".into(),
            pr_title: Some("Parser fixes".into()),
            commit_timestamp: Utc.with_ymd_and_hms(2024, 5, 1, 12, 0, 0).unwrap(),
            files: vec![FileChange::new("src/parser.rs", FileStatus::Modified, 3, 1)],
            ratings,
            created_at: Utc.with_ymd_and_hms(2024, 6, 1, 9, 30, 0).unwrap(),
        }
    }

    #[test]
    fn valid_fixture() {
        fixture(vec![rating("A"), rating("B")]).validate().unwrap();
    }

    #[test]
    fn likert_out_of_range_names_criterion() {
        let mut r = rating("A");
        r.likert = Some(LikertRatings {
            readability: 6,
            ..LikertRatings::uniform(3)
        });
        let err = fixture(vec![r]).validate().unwrap_err();
        assert_eq!(err.violations.len(), 1);
        assert!(err.violations[0].contains("readability = 6"));
    }

    #[test]
    fn empty_rationale_rejected() {
        let mut r = rating("A");
        r.rationale = "  ".into();
        let err = fixture(vec![r]).validate().unwrap_err();
        assert!(err.violations[0].contains("rationale"));
    }

    #[test]
    fn reports_every_violation() {
        let mut bad = rating("A");
        bad.likert = None;
        bad.rationale.clear();
        let err = fixture(vec![bad, rating("A")]).validate().unwrap_err();
        assert_eq!(err.violations.len(), 3, "{:?}", err.violations);
        assert!(fixture(vec![]).validate().is_err());
    }

    #[test]
    fn failed_generation_record() {
        let failed = RatingRecord {
            approach_name: "B".into(),
            generated_message: None,
            success: false,
            refinement_used: false,
            likert: None,
            rationale: String::new(),
            scores: None,
        };
        fixture(vec![rating("A"), failed.clone()]).validate().unwrap();
        let mut rated = failed;
        rated.likert = Some(LikertRatings::uniform(1));
        assert!(fixture(vec![rated]).validate().is_err());
    }

    #[test]
    fn schema_has_no_identity_fields() {
        let json = serde_json::to_value(fixture(vec![rating("A")])).unwrap();
        fn keys(v: &serde_json::Value, out: &mut Vec<String>) {
            match v {
                serde_json::Value::Object(m) => {
                    for (k, v) in m {
                        out.push(k.clone());
                        keys(v, out);
                    }
                }
                serde_json::Value::Array(a) => a.iter().for_each(|v| keys(v, out)),
                _ => {}
            }
        }
        let mut all = Vec::new();
        keys(&json, &mut all);
        for k in all {
            assert!(!k.contains("user") && !k.contains("token") && !k.contains("login"), "{k}");
        }
    }

    #[test]
    fn id_format() {
        let id = SubmissionId::random();
        assert_eq!(id.as_str().len(), 32);
        assert!(SubmissionId::parse(id.as_str()).is_ok());
        assert!(SubmissionId::parse("XYZ").is_err());
    }
}
