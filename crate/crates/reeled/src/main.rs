use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reeled::analysis::{analyze, render_text};
use reeled::generate::{generate, GenerateRequest};
use reeled::media::{AssembleOptions, Layout, TrimMode, TrimOptions};
use reeled::openai::{provider_by_id, PROVIDER_IDS};
use reeled::service::api::{router, TokenEntry, TokenRegistry};
use reeled::service::jobs::fail_interrupted;
use reeled::service::{MemoryStore, PipelineExecutor, QuizCatalog, Role, Service, SqliteStore, Storage};
use reeled_core::llm::{LlmOptions, ReelSpec};

/// Turns lecture recordings into short captioned reels.
#[derive(Debug, Parser)]
#[command(name = "reeled", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the whole pipeline once and write the reels and manifest.
    Generate(GenerateArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
    /// Compare the two study conditions in an exported dataset.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayoutArg {
    #[value(name = "per_reel")]
    PerReel,
    #[value(name = "single_concat")]
    SingleConcat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Reencode,
    Copy,
}

impl From<ModeArg> for TrimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Reencode => TrimMode::Reencode,
            ModeArg::Copy => TrimMode::Copy,
        }
    }
}

#[derive(Debug, Args)]
struct LlmArgs {
    /// LLM provider id: mock or openai.
    #[arg(long, default_value = "mock")]
    provider: String,
    /// Model name for the openai provider.
    #[arg(long)]
    model: Option<String>,
    /// Repair attempts after an invalid model reply.
    #[arg(long, default_value_t = 2)]
    max_retries: u32,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Video path or URL. Optional with --plan-only.
    #[arg(long)]
    source: Option<String>,
    /// WebVTT or SRT captions.
    #[arg(long)]
    captions: PathBuf,
    #[arg(long, default_value_t = 5)]
    reels: u32,
    /// Shortest reel, seconds.
    #[arg(long, default_value_t = 30)]
    min: u32,
    /// Longest reel, seconds.
    #[arg(long, default_value_t = 60)]
    max: u32,
    /// Preferred reel length, seconds; defaults to the midpoint.
    #[arg(long)]
    target: Option<u32>,
    #[command(flatten)]
    llm: LlmArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "per_reel")]
    layout: LayoutArg,
    #[arg(long, value_enum, default_value = "reencode")]
    mode: ModeArg,
    /// Source keyframe spacing in ms, the duration tolerance in copy mode.
    #[arg(long, default_value_t = 2000)]
    keyframe_interval_ms: u64,
    /// Parallel trims; 0 means one per CPU.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Stop after planning; no video is touched.
    #[arg(long)]
    plan_only: bool,
    /// Timestamp recorded in the manifest instead of the current time.
    #[arg(long)]
    now: Option<String>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// `memory`, or a SQLite file path (optionally prefixed `sqlite:`).
    #[arg(long, default_value = "memory")]
    db: String,
    /// Where job files live; served under /media/.
    #[arg(long, default_value = "media")]
    media_root: PathBuf,
    /// JSON array of {"token", "role", "user"}; random tokens are printed
    /// when omitted.
    #[arg(long)]
    tokens: Option<PathBuf>,
    /// JSON object of quiz id to answer key.
    #[arg(long)]
    quizzes: Option<PathBuf>,
    /// Jobs run at the same time.
    #[arg(long, default_value_t = 2)]
    workers: usize,
    #[command(flatten)]
    llm: LlmArgs,
    #[arg(long, value_enum, default_value = "reencode")]
    mode: ModeArg,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// CSV in the service's export layout.
    #[arg(long)]
    input: PathBuf,
    /// JSON report path; a text table is written next to it with a .txt
    /// extension.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn provider(llm: &LlmArgs) -> Result<Arc<dyn reeled_core::llm::LlmProvider + Send + Sync>, Failure> {
    provider_by_id(&llm.provider, llm.model.as_deref())
        .map(Arc::from)
        .ok_or_else(|| Failure::Usage(format!("unknown provider `{}` (expected one of {})", llm.provider, PROVIDER_IDS.join(", "))))
}

fn llm_options(llm: &LlmArgs) -> LlmOptions {
    LlmOptions { max_retries: llm.max_retries, ..LlmOptions::default() }
}

fn run_generate(a: GenerateArgs) -> Result<(), Failure> {
    let spec = ReelSpec::new(a.reels, a.min, a.max)
        .and_then(|s| match a.target {
            Some(t) => s.with_target(t),
            None => Ok(s),
        })
        .map_err(|e| Failure::Usage(format!("invalid reel spec: {e}")))?;
    let provider = provider(&a.llm)?;
    let req = GenerateRequest {
        source: a.source,
        captions: a.captions,
        spec,
        llm: llm_options(&a.llm),
        out_dir: a.out,
        plan_only: a.plan_only,
        assemble: AssembleOptions {
            layout: match a.layout {
                LayoutArg::PerReel => Layout::PerReel,
                LayoutArg::SingleConcat => Layout::SingleConcat,
            },
            trim: TrimOptions { mode: a.mode.into(), keyframe_interval_ms: a.keyframe_interval_ms },
            workers: a.workers,
            generated_at: Some(a.now.unwrap_or_else(|| chrono::Utc::now().to_rfc3339())),
        },
    };
    let done = generate(&req, provider.as_ref()).map_err(|e| Failure::Runtime(e.to_string()))?;
    for s in &done.plan.segments {
        println!("reel {}: {} – {} ms  {}", s.order, s.cut_start_ms, s.cut_end_ms, s.label);
    }
    println!("manifest: {}", done.manifest_path.display());
    Ok(())
}

fn open_store(db: &str) -> Result<Arc<dyn Storage>, Failure> {
    if db == "memory" {
        return Ok(Arc::new(MemoryStore::new()));
    }
    let path = db.strip_prefix("sqlite:").unwrap_or(db);
    let store = SqliteStore::open(Path::new(path)).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(Arc::new(store))
}

fn run_serve(a: ServeArgs) -> Result<(), Failure> {
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| Failure::Usage(format!("bad listen address: {e}")))?;
    let store = open_store(&a.db)?;
    let interrupted = fail_interrupted(store.as_ref()).map_err(|e| Failure::Runtime(e.to_string()))?;
    if interrupted > 0 {
        eprintln!("marked {interrupted} interrupted job(s) as failed");
    }
    fs::create_dir_all(&a.media_root).map_err(|e| Failure::Runtime(format!("{}: {e}", a.media_root.display())))?;
    let media_root = fs::canonicalize(&a.media_root).map_err(|e| Failure::Runtime(e.to_string()))?;
    let catalog = match &a.quizzes {
        Some(p) => QuizCatalog::from_file(p).map_err(Failure::Runtime)?,
        None => QuizCatalog::default(),
    };
    let tokens = match &a.tokens {
        Some(p) => TokenRegistry::from_file(p).map_err(Failure::Runtime)?,
        None => {
            let entries: Vec<TokenEntry> = [(Role::Instructor, "instructor"), (Role::Student, "student"), (Role::Researcher, "researcher")]
                .into_iter()
                .map(|(role, user)| TokenEntry { token: uuid::Uuid::new_v4().simple().to_string(), role, user: user.into() })
                .collect();
            for e in &entries {
                println!("token {:<10} {}", e.user, e.token);
            }
            TokenRegistry::new(entries)
        }
    };
    let exec = PipelineExecutor {
        media_root: media_root.clone(),
        provider: provider(&a.llm)?,
        llm: llm_options(&a.llm),
        trim: TrimOptions { mode: a.mode.into(), ..TrimOptions::default() },
        trim_workers: 0,
    };
    let service = Arc::new(Service::new(store, Arc::new(exec), catalog).with_workers(a.workers));
    let app = router(service, tokens, &media_root);

    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Failure::Runtime(format!("{addr}: {e}")))?;
        println!("listening on http://{addr}");
        axum::serve(listener, app).await.map_err(|e| Failure::Runtime(e.to_string()))
    })
}

fn run_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let csv = fs::read_to_string(&a.input).map_err(|e| Failure::Runtime(format!("{}: {e}", a.input.display())))?;
    let report = analyze(&csv).map_err(|e| Failure::Runtime(e.to_string()))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    let text = render_text(&report);
    let write = |p: &Path, body: &str| fs::write(p, body).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())));
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    write(&a.out, &json)?;
    write(&a.out.with_extension("txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            // help and version exit 0; everything else is a usage error
            return ExitCode::from(if code == 0 { 0 } else { 2 });
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Serve(a) => run_serve(a),
        Command::Analyze(a) => run_analyze(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\nUsage: reeled <generate|serve|analyze> [OPTIONS]  (see --help)");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
