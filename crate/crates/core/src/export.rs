//! Denormalized export: one row per rating, carrying its submission's fields.

use std::io::{self, BufRead, Write};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::commit::{CommitId, CommitType, FileChange};
use crate::submission::{Criterion, RatingRecord, Submission, SubmissionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    JsonLines,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" | "json-lines" | "jsonlines" => Ok(Self::JsonLines),
            other => Err(format!("unknown export format {other:?} (expected csv or jsonl)")),
        }
    }
}

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 24] = [
    "submission_id",
    "created_at",
    "repo",
    "commit_id",
    "commit_type",
    "commit_timestamp",
    "original_message",
    "pr_title",
    "issue_report",
    "files",
    "rating_index",
    "approach_name",
    "success",
    "refinement_used",
    "generated_message",
    "accuracy",
    "integrity",
    "readability",
    "applicability",
    "completeness",
    "rationale",
    "bleu",
    "meteor",
    "rouge_l",
];

/// A JSON-lines export record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub submission_id: SubmissionId,
    pub created_at: DateTime<Utc>,
    pub repo: String,
    pub commit_id: CommitId,
    pub commit_type: CommitType,
    pub commit_timestamp: DateTime<Utc>,
    pub original_message: String,
    pub pr_title: Option<String>,
    pub issue_report: Option<String>,
    pub files: Vec<FileChange>,
    pub rating_index: usize,
    pub rating: RatingRecord,
}

pub fn export_records(subs: &[Submission]) -> Vec<ExportRecord> {
    subs.iter()
        .flat_map(|s| {
            s.ratings.iter().enumerate().map(move |(i, r)| ExportRecord {
                submission_id: s.submission_id.clone(),
                created_at: s.created_at,
                repo: s.repo.clone(),
                commit_id: s.commit_id.clone(),
                commit_type: s.commit_type,
                commit_timestamp: s.commit_timestamp,
                original_message: s.original_message.clone(),
                pr_title: s.pr_title.clone(),
                issue_report: s.issue_report.clone(),
                files: s.files.clone(),
                rating_index: i,
                rating: r.clone(),
            })
        })
        .collect()
}

fn csv_row(rec: &ExportRecord) -> io::Result<Vec<String>> {
    let opt = |o: &Option<String>| o.clone().unwrap_or_default();
    let r = &rec.rating;
    let mut row = vec![
        rec.submission_id.to_string(),
        rec.created_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        rec.repo.clone(),
        rec.commit_id.to_string(),
        rec.commit_type.to_string(),
        rec.commit_timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        rec.original_message.clone(),
        opt(&rec.pr_title),
        opt(&rec.issue_report),
        serde_json::to_string(&rec.files).map_err(io::Error::other)?,
        rec.rating_index.to_string(),
        r.approach_name.clone(),
        r.success.to_string(),
        r.refinement_used.to_string(),
        opt(&r.generated_message),
    ];
    for c in Criterion::ALL {
        row.push(r.likert.map(|l| l.get(c).to_string()).unwrap_or_default());
    }
    row.push(r.rationale.clone());
    match &r.scores {
        Some(s) => row.extend([s.bleu, s.meteor, s.rouge_l].map(|v| v.to_string())),
        None => row.extend([String::new(), String::new(), String::new()]),
    }
    Ok(row)
}

pub fn write_export(subs: &[Submission], format: ExportFormat, out: &mut dyn Write) -> io::Result<()> {
    let records = export_records(subs);
    match format {
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for rec in &records {
                w.write_record(csv_row(rec)?)?;
            }
            w.flush()
        }
        ExportFormat::JsonLines => {
            for rec in &records {
                serde_json::to_writer(&mut *out, rec)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

/// Regroups JSON-lines export records into submissions, in first-seen order.
pub fn submissions_from_json_lines(input: impl BufRead) -> io::Result<Vec<Submission>> {
    let mut subs: Vec<Submission> = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExportRecord = serde_json::from_str(&line).map_err(io::Error::other)?;
        match subs.iter_mut().find(|s| s.submission_id == rec.submission_id) {
            Some(s) => s.ratings.push(rec.rating),
            None => subs.push(Submission {
                submission_id: rec.submission_id,
                repo: rec.repo,
                commit_id: rec.commit_id,
                commit_type: rec.commit_type,
                issue_report: rec.issue_report,
                original_message: rec.original_message,
                pr_title: rec.pr_title,
                commit_timestamp: rec.commit_timestamp,
                files: rec.files,
                ratings: vec![rec.rating],
                created_at: rec.created_at,
            }),
        }
    }
    Ok(subs)
}
