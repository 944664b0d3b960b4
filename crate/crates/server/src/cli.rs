//! Command-line entry points: `serve`, `generate`, and `score`.

use std::future::Future;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use clap::{Args, Parser, Subcommand};
use commitbench_clients::{GithubClient, OpenRouterClient};
use commitbench_core::registry::RegistryError;
use commitbench_core::store::{FileStore, StoreError};
use commitbench_core::{Approach, ApproachRegistry, GenerationResult, MetricScores, Pipeline};
use serde::Serialize;
use tokio::net::TcpListener;

use crate::api::{router, AppState};
use crate::auth::ResearchAuth;
use crate::config::{ConfigError, Env, ServiceSettings, RESEARCH_PASSWORD_ENV};
use crate::session::SessionManager;
use crate::shuffle::ShuffleSource;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_CONFIG_DIR: &str = "config";

#[derive(Debug, Parser)]
#[command(name = "commitbench", version, about = "Generate, score, and evaluate commit messages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Generate messages for commits with the configured approaches.
    Generate(GenerateArgs),
    /// Print BLEU, METEOR, and ROUGE-L of GENERATED against ORIGINAL.
    Score { original: String, generated: String },
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = DEFAULT_BIND)]
    pub bind: SocketAddr,
    /// Directory holding approaches.toml, refinement_prompt.txt, and
    /// optionally service.toml.
    #[arg(long, default_value = DEFAULT_CONFIG_DIR)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Repository as owner/name.
    #[arg(long)]
    pub repo: String,
    /// Commit SHA; repeat for several commits.
    #[arg(long, required = true)]
    pub sha: Vec<String>,
    /// Approach name; repeat to select several. Defaults to all.
    #[arg(long)]
    pub approach: Vec<String>,
    /// Write JSON lines here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_CONFIG_DIR)]
    pub config: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("unknown approach {name:?}; known approaches: {}", known.join(", "))]
    UnknownApproach { name: String, known: Vec<String> },
    #[error("no approaches are configured")]
    NoApproaches,
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("{0}")]
    Client(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn llm_pipeline(settings: &ServiceSettings, env: &Env) -> Result<Pipeline, CliError> {
    let llm = OpenRouterClient::new(settings.llm_config(env)?).map_err(|e| CliError::Client(e.to_string()))?;
    Ok(Pipeline::new(Arc::new(llm)).with_policy(settings.retry))
}

/// Everything `serve` needs, resolved from `config_dir` and `env`.
pub fn build_state(config_dir: &Path, env: &Env) -> Result<AppState, CliError> {
    let settings = ServiceSettings::load(config_dir)?;
    let pipeline = llm_pipeline(&settings, env)?;
    let registry = ApproachRegistry::open(config_dir)?;
    let store = FileStore::open(env.data_dir())?;
    Ok(AppState {
        sessions: SessionManager::default(),
        research: env.get(RESEARCH_PASSWORD_ENV).map(ResearchAuth::new),
        registry: RwLock::new(registry),
        store: Arc::new(store),
        pipeline,
        github: GithubClient::new(settings.github.clone()),
        consent_path: env.consent_path(),
        shuffle: ShuffleSource::from_entropy(),
    })
}

/// Serves `state` on `listener` until `shutdown` resolves, then lets
/// in-flight requests finish.
pub async fn serve_on(
    listener: TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(shutdown)
        .await
}

pub async fn cmd_serve(
    args: &ServeArgs,
    env: &Env,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), CliError> {
    let state = build_state(&args.config, env)?;
    if state.research.is_none() {
        eprintln!("warning: {RESEARCH_PASSWORD_ENV} is not set; the research endpoints are disabled");
    }
    let listener = TcpListener::bind(args.bind).await.map_err(|source| CliError::Bind {
        addr: args.bind,
        source,
    })?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    serve_on(listener, state, shutdown).await?;
    Ok(())
}

/// One line of `generate` output.
#[derive(Debug, Serialize)]
struct GenerateLine<'a> {
    repo: &'a str,
    commit_id: &'a str,
    #[serde(flatten)]
    result: &'a GenerationResult,
}

#[derive(Debug, Serialize)]
struct CommitErrorLine<'a> {
    repo: &'a str,
    commit_id: &'a str,
    success: bool,
    error_kind: &'static str,
    error_detail: String,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct GenerateReport {
    pub records: usize,
    pub errors: usize,
}

impl GenerateReport {
    /// 0 iff no error record was produced.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.errors > 0)
    }
}

fn select_approaches(registry: &ApproachRegistry, names: &[String]) -> Result<Vec<Approach>, CliError> {
    if registry.list().is_empty() {
        return Err(CliError::NoApproaches);
    }
    if names.is_empty() {
        return Ok(registry.list().to_vec());
    }
    names
        .iter()
        .map(|n| {
            registry.get(n).cloned().ok_or_else(|| CliError::UnknownApproach {
                name: n.clone(),
                known: registry.names().into_iter().map(str::to_owned).collect(),
            })
        })
        .collect()
}

/// Writes one JSON line per (commit, approach) to `--out` or `stdout`, and
/// a human summary to `summary`.
pub async fn cmd_generate(
    args: &GenerateArgs,
    env: &Env,
    stdout: &mut dyn Write,
    summary: &mut dyn Write,
) -> Result<GenerateReport, CliError> {
    let settings = ServiceSettings::load(&args.config)?;
    let registry = ApproachRegistry::open(&args.config)?;
    let approaches = select_approaches(&registry, &args.approach)?;
    let creds = env.github_credentials()?;
    let pipeline = llm_pipeline(&settings, env)?;
    let github = GithubClient::new(settings.github.clone());

    let mut file;
    let out: &mut dyn Write = match &args.out {
        Some(path) => {
            file = std::io::BufWriter::new(std::fs::File::create(path)?);
            &mut file
        }
        None => stdout,
    };

    let mut report = GenerateReport::default();
    for sha in &args.sha {
        let ctx = match github.get_commit_context(&creds, &args.repo, sha).await {
            Ok(ctx) => ctx,
            Err(e) => {
                let line = CommitErrorLine {
                    repo: &args.repo,
                    commit_id: sha,
                    success: false,
                    error_kind: "commit_unavailable",
                    error_detail: e.to_string(),
                };
                writeln!(out, "{}", serde_json::to_string(&line).expect("serializable"))?;
                writeln!(summary, "{sha}: error: {e}")?;
                report.records += 1;
                report.errors += 1;
                continue;
            }
        };
        let results = pipeline
            .generate_for_commit(&ctx, &approaches, registry.refinement_prompt())
            .await
            .map_err(|_| CliError::NoApproaches)?;
        for r in &results {
            let line = GenerateLine {
                repo: &args.repo,
                commit_id: ctx.commit_id.as_str(),
                result: r,
            };
            writeln!(out, "{}", serde_json::to_string(&line).expect("serializable"))?;
            report.records += 1;
            let short = &sha[..sha.len().min(10)];
            match (r.message(), r.error_kind()) {
                (Some(m), _) => writeln!(summary, "{short} {}: ok: {m}", r.approach_name())?,
                (None, kind) => {
                    report.errors += 1;
                    let kind = kind.map(|k| k.as_str()).unwrap_or("unknown");
                    writeln!(summary, "{short} {}: error: {kind}", r.approach_name())?;
                }
            }
        }
    }
    out.flush()?;
    writeln!(
        summary,
        "{} record(s), {} error(s)",
        report.records, report.errors
    )?;
    Ok(report)
}

/// The three scores, one per line, to six decimals.
pub fn cmd_score(original: &str, generated: &str) -> String {
    let s: MetricScores = commitbench_core::metrics::score_all(original, generated);
    format!(
        "bleu {:.6}\nmeteor {:.6}\nrouge_l {:.6}\n",
        s.bleu, s.meteor, s.rouge_l
    )
}
