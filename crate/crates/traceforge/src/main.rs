use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use traceforge::generate::{generate_dataset, MANIFEST_FILE};
use traceforge::harness::{
    run_eval, EvalOptions, GreedyResponder, HttpResponder, ModelEndpointConfig, OracleResponder, Responder,
    DEFAULT_API_KEY_ENV,
};
use traceforge::io::{read_dumps, read_json, read_jsonl, read_manifest, write_jsonl};
use traceforge::pipeline::{analyze_reasoning, dump_curves, margin_summary, score_log};
use traceforge::report::{emit_margin_report, emit_reasoning_report, emit_report};
use traceforge_core::prompt::PromptKind;
use traceforge_core::scoring::{aggregate_runs, ClassifierConfig};
use traceforge_core::task::{DatasetConfig, ModelResponse};
use traceforge_core::textstats::LexiconConfig;
use traceforge_core::tracer::{GREEDY_MODEL, ORACLE_MODEL};

#[derive(Parser)]
#[command(name = "traceforge", version, about = "Synthetic line-tracing benchmark for vision-language models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render the dataset and write manifest.json.
    Generate(GenerateArgs),
    /// Query a model (or a built-in tracer) and append responses to a log.
    Run(RunArgs),
    /// Score response logs against a manifest and write reports.
    Score(ScoreArgs),
    /// Self-correction, length and substitution statistics of reasoning traces.
    AnalyzeReasoning(ReasoningArgs),
    /// Analyses over region dumps.
    #[command(subcommand)]
    Probe(ProbeCmd),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    swirl_per_level: usize,
    /// Comma-separated wire counts, one circuit image each.
    #[arg(long, value_delimiter = ',')]
    circuit_wires: Option<Vec<usize>>,
    #[arg(long, default_value_t = 50)]
    condition_per_kind: usize,
    /// Skip the masked condition variants.
    #[arg(long)]
    no_masks: bool,
    /// Use the explicit step-by-step swirl prompt.
    #[arg(long)]
    instructed: bool,
    #[arg(long, default_value_t = 16)]
    patch_px: u32,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Model id; `builtin/oracle` and `builtin/greedy` need no endpoint.
    #[arg(long)]
    model: String,
    /// Base URL of an OpenAI-compatible API.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 3)]
    runs: u32,
    #[arg(long, default_value_t = 8)]
    concurrency: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 4)]
    retries: u32,
    #[arg(long, default_value = DEFAULT_API_KEY_ENV)]
    api_key_env: String,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long)]
    reasoning_effort: Option<String>,
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Response log(s); repeat to merge several models.
    #[arg(long, required = true)]
    responses: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = traceforge_core::scoring::DEFAULT_THETA_TOL_DEG)]
    theta_tol_deg: f64,
    #[arg(long, default_value_t = traceforge_core::scoring::DEFAULT_D_ADJ)]
    d_adj: f64,
}

#[derive(Args)]
struct ReasoningArgs {
    #[arg(long, required = true)]
    responses: Vec<PathBuf>,
    /// JSON lexicon overriding the built-in keyword lists.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Group statistics by task group instead of one group per model.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// Attention and representation margin curves from region dumps.
    Margins {
        #[arg(long)]
        dumps: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_responses(paths: &[PathBuf]) -> Result<Vec<ModelResponse>> {
    let mut all = Vec::new();
    for p in paths {
        if !p.exists() {
            bail!("{}: no such response log", p.display());
        }
        all.extend(read_jsonl::<ModelResponse>(p)?);
    }
    Ok(all)
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = DatasetConfig {
        seed: a.seed,
        swirl_per_level: a.swirl_per_level,
        condition_per_kind: a.condition_per_kind,
        condition_masks: !a.no_masks,
        patch_px: a.patch_px,
        ..DatasetConfig::default()
    };
    if let Some(w) = a.circuit_wires {
        cfg.circuit_wires = w;
    }
    if a.instructed {
        cfg.swirl_prompt = PromptKind::SwirlInstructed;
    }
    let m = generate_dataset(&cfg, &a.out)?;
    println!("wrote {} tasks to {}", m.tasks.len(), a.out.join(MANIFEST_FILE).display());
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let manifest = read_manifest(&a.manifest)?;
    let image_dir = a.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let responder: Box<dyn Responder> = match (a.endpoint, a.model.as_str()) {
        (Some(url), _) => {
            let cfg = ModelEndpointConfig {
                concurrency: a.concurrency,
                timeout_secs: a.timeout,
                retries: a.retries,
                api_key_env: a.api_key_env,
                temperature: a.temperature,
                reasoning_effort: a.reasoning_effort,
                ..ModelEndpointConfig::new(&url, &a.model)
            };
            cfg.validate().map_err(anyhow::Error::msg)?;
            Box::new(HttpResponder::new(cfg))
        }
        (None, ORACLE_MODEL) => Box::new(OracleResponder),
        (None, GREEDY_MODEL) => Box::new(GreedyResponder),
        (None, m) => bail!("model {m:?} needs --endpoint (built-ins: {ORACLE_MODEL}, {GREEDY_MODEL})"),
    };
    let opts = EvalOptions { runs: a.runs, concurrency: a.concurrency, image_dir, limit: a.limit };
    let s = run_eval(&manifest, responder.as_ref(), &opts, &a.out)?;
    println!("queried {} (failed {}), already logged {}", s.queried, s.failed, s.skipped);
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let manifest = read_manifest(&a.manifest)?;
    let responses = read_responses(&a.responses)?;
    let cfg = ClassifierConfig { theta_tol_deg: a.theta_tol_deg, d_adj: a.d_adj };
    let scored = score_log(&manifest, &responses, &cfg);
    if scored.unmatched > 0 {
        eprintln!("warning: {} responses reference tasks missing from the manifest", scored.unmatched);
    }
    let stats = aggregate_runs(&scored.records).context("no responses to score")?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_jsonl(&scored.records, &a.out.join("scores.jsonl"))?;
    for p in emit_report(&stats, &scored.records, &manifest, &a.out)? {
        println!("wrote {}", p.display());
    }
    for s in &stats {
        println!("{:<24} {:<28} {:6.1} ± {:4.1}", s.model, s.group, s.mean, s.std);
    }
    Ok(())
}

fn analyze(a: ReasoningArgs) -> Result<()> {
    let responses = read_responses(&a.responses)?;
    let lex: LexiconConfig = match &a.lexicon {
        Some(p) => read_json(p)?,
        None => LexiconConfig::default(),
    };
    let manifest = a.manifest.as_deref().map(read_manifest).transpose()?;
    let rows = analyze_reasoning(&responses, manifest.as_ref(), &lex);
    for r in rows.iter().filter(|r| !r.has_lexicon) {
        eprintln!("warning: no self-correction lexicon for model {:?}", r.model);
    }
    println!("wrote {}", emit_reasoning_report(&rows, &a.out)?.display());
    Ok(())
}

fn margins(dumps: &Path, out: &Path) -> Result<()> {
    let dumps = read_dumps(dumps)?;
    if dumps.is_empty() {
        bail!("no dumps found");
    }
    let summary = margin_summary(&dump_curves(&dumps)?)?;
    for p in emit_margin_report(&summary, out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Generate(a) => generate(a),
        Cmd::Run(a) => run(a),
        Cmd::Score(a) => score(a),
        Cmd::AnalyzeReasoning(a) => analyze(a),
        Cmd::Probe(ProbeCmd::Margins { dumps, out }) => margins(&dumps, &out),
    }
}
