//! Core of a commit-message generation and evaluation service.
//!
//! - [`metrics`]: BLEU, METEOR, ROUGE-L, generic over [`Real`].
//! - [`approach`] and [`registry`]: prompt templates and their storage.
//! - [`pipeline`]: the generate / refine / select flow with retries.
//! - [`submission`], [`store`], [`export`]: human-evaluation records.

pub mod approach;
pub mod clock;
pub mod commit;
pub mod export;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod registry;
pub mod scalar;
pub mod secret;
pub mod store;
pub mod submission;

pub use approach::{render_prompt, Approach, ApproachError, Placeholder, RefinementPrompt};
pub use commit::{classify_commit_type, CommitContext, CommitId, CommitType, FileChange, FileStatus};
pub use pipeline::{ErrorKind, GenerationResult, Pipeline, RetryPolicy};
pub use registry::ApproachRegistry;
pub use scalar::Real;
pub use secret::Secret;
pub use submission::{LikertRatings, RatingRecord, Submission, SubmissionId};

/// Metric scores in double precision, as stored and reported.
pub type MetricScores = metrics::Scores<f64>;

/// Single-precision metric scores.
pub type MetricScoresF32 = metrics::Scores<f32>;
