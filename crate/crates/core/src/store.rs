//! Append-only submission storage.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::export::{write_export, ExportFormat};
use crate::submission::{Submission, SubmissionId, ValidationError};

/// Version stamp written with every stored record.
pub const SCHEMA_VERSION: u32 = 1;

pub const SUBMISSIONS_FILE: &str = "submissions.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("submission id {0} already stored")]
    DuplicateId(SubmissionId),
    #[error("storage I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt record at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("unsupported schema version {0}")]
    Version(u32),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubmissionFilter {
    pub repo: Option<String>,
    pub approach: Option<String>,
    /// Inclusive lower bound on `created_at`.
    pub from: Option<DateTime<Utc>>,
    /// Exclusive upper bound on `created_at`.
    pub to: Option<DateTime<Utc>>,
}

impl SubmissionFilter {
    pub fn matches(&self, s: &Submission) -> bool {
        self.repo.as_ref().is_none_or(|r| &s.repo == r)
            && self
                .approach
                .as_ref()
                .is_none_or(|a| s.ratings.iter().any(|r| &r.approach_name == a))
            && self.from.is_none_or(|from| s.created_at >= from)
            && self.to.is_none_or(|to| s.created_at < to)
    }
}

/// Storage backend. Implementations never modify or delete a stored record.
pub trait SubmissionStore: Send + Sync {
    /// Validates and durably stores `sub`.
    fn save(&self, sub: &Submission) -> Result<SubmissionId, StoreError>;

    /// Matching submissions, newest `created_at` first; equal timestamps keep
    /// the most recently saved first.
    fn list(&self, filter: &SubmissionFilter) -> Result<Vec<Submission>, StoreError>;

    fn get(&self, id: &SubmissionId) -> Result<Option<Submission>, StoreError> {
        Ok(self
            .list(&SubmissionFilter::default())?
            .into_iter()
            .find(|s| &s.submission_id == id))
    }

    fn export(&self, format: ExportFormat, out: &mut dyn Write) -> Result<(), StoreError> {
        let subs = self.list(&SubmissionFilter::default())?;
        write_export(&subs, format, out)?;
        Ok(())
    }
}

fn newest_first(mut subs: Vec<Submission>) -> Vec<Submission> {
    subs.reverse();
    subs.sort_by_key(|s| std::cmp::Reverse(s.created_at));
    subs
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    records: RwLock<Vec<Submission>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SubmissionStore for MemoryStore {
    fn save(&self, sub: &Submission) -> Result<SubmissionId, StoreError> {
        sub.validate()?;
        let mut records = self.records.write().unwrap();
        if records.iter().any(|s| s.submission_id == sub.submission_id) {
            return Err(StoreError::DuplicateId(sub.submission_id.clone()));
        }
        records.push(sub.clone());
        Ok(sub.submission_id.clone())
    }

    fn list(&self, filter: &SubmissionFilter) -> Result<Vec<Submission>, StoreError> {
        let records = self.records.read().unwrap();
        Ok(newest_first(records.iter().filter(|s| filter.matches(s)).cloned().collect()))
    }
}

#[derive(Serialize, Deserialize)]
struct StoredRecord {
    schema_version: u32,
    submission: Submission,
}

/// One JSON record per line in `<dir>/submissions.jsonl`.
///
/// Each save is a single appended line followed by `fsync`. A trailing
/// partial line left by an interrupted write is cut off when the store is
/// opened. Reads and writes share one lock, so readers never observe a
/// half-written record.
#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    ids: Mutex<HashSet<SubmissionId>>,
}

impl FileStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = dir.join(SUBMISSIONS_FILE);
        if !path.exists() {
            File::create(&path)?.sync_all()?;
        }
        repair_tail(&path)?;
        let ids = read_all(&path)?.into_iter().map(|s| s.submission_id).collect();
        Ok(Self {
            path,
            ids: Mutex::new(ids),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn repair_tail(path: &Path) -> io::Result<()> {
    let mut file = OpenOptions::new().read(true).write(true).open(path)?;
    let len = file.metadata()?.len();
    if len == 0 {
        return Ok(());
    }
    let mut bytes = Vec::with_capacity(len as usize);
    file.read_to_end(&mut bytes)?;
    if bytes.last() == Some(&b'\n') {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    file.set_len(keep as u64)?;
    file.seek(SeekFrom::End(0))?;
    file.sync_all()
}

fn read_all(path: &Path) -> Result<Vec<Submission>, StoreError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StoredRecord = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(StoreError::Version(rec.schema_version));
        }
        out.push(rec.submission);
    }
    Ok(out)
}

impl SubmissionStore for FileStore {
    fn save(&self, sub: &Submission) -> Result<SubmissionId, StoreError> {
        sub.validate()?;
        let mut line = serde_json::to_vec(&StoredRecord {
            schema_version: SCHEMA_VERSION,
            submission: sub.clone(),
        })
        .map_err(io::Error::other)?;
        line.push(b'\n');

        let mut ids = self.ids.lock().unwrap();
        if ids.contains(&sub.submission_id) {
            return Err(StoreError::DuplicateId(sub.submission_id.clone()));
        }
        let mut file = OpenOptions::new().append(true).open(&self.path)?;
        file.write_all(&line)?;
        file.sync_data()?;
        ids.insert(sub.submission_id.clone());
        Ok(sub.submission_id.clone())
    }

    fn list(&self, filter: &SubmissionFilter) -> Result<Vec<Submission>, StoreError> {
        let _guard = self.ids.lock().unwrap();
        let all = read_all(&self.path)?;
        Ok(newest_first(all.into_iter().filter(|s| filter.matches(s)).collect()))
    }
}
