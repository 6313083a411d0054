//! `lrlkit`: diagnose, adapt and evaluate an LLM on a low-resource language.

mod backend;
mod commands;
mod config;
mod error;
mod output;
mod pipeline;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lrlkit::harness::ApiStyle;
use lrlkit::promptkit::Variant;
use lrlkit::retriever::RetrievalMode;

use crate::commands::Ctx;
use crate::config::{BackendKind, LoadedConfig, MockMode, PositionChoice};
use crate::error::{CliResult, EXIT_FLAGGED, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "lrlkit", version, about = "Low-resource language diagnostics and in-context adaptation toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

/// Overrides for the config file; flags win.
#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Dataset file (JSONL or TSV).
    #[arg(long, global = true)]
    data: Option<PathBuf>,

    /// Parallel corpus in `target ||| english` form.
    #[arg(long, global = true)]
    parallel: Option<PathBuf>,

    #[arg(long, global = true)]
    language_code: Option<String>,

    #[arg(long, global = true)]
    language_name: Option<String>,

    /// Tokenizer definition (tokenizer.json).
    #[arg(long, global = true)]
    tokenizer: Option<PathBuf>,

    /// Dictionary TSV to use instead of training one.
    #[arg(long, global = true)]
    dictionary: Option<PathBuf>,

    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,

    #[arg(long, short, global = true)]
    k: Option<usize>,

    #[arg(long, global = true, value_parser = parse_retrieval)]
    retrieval: Option<RetrievalMode>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    concurrency: Option<usize>,

    /// Split to evaluate (test, dev).
    #[arg(long, global = true, value_parser = parse_split)]
    split: Option<lrlkit::corpus::Split>,

    /// Description position for few-shot variants: auto, before, after.
    #[arg(long, global = true)]
    position: Option<PositionChoice>,

    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,

    /// Answer mode of the bundled mock backend.
    #[arg(long, global = true, value_enum)]
    mock: Option<MockMode>,

    #[arg(long, global = true, env = "LRLKIT_BACKEND_URL")]
    backend_url: Option<String>,

    #[arg(long, global = true, env = "LRLKIT_MODEL")]
    model: Option<String>,

    #[arg(long, global = true, env = "LRLKIT_API_KEY", hide_env_values = true)]
    api_key: Option<String>,

    #[arg(long, global = true, value_parser = parse_api_style)]
    api_style: Option<ApiStyle>,

    /// Log filter, e.g. `info` or `lrlkit=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure IP, TBR and TP and write profile.json.
    Diagnose {
        #[arg(long, default_value = "profile.json")]
        out: PathBuf,
        /// Record a known baseline zero-shot accuracy in the profile.
        #[arg(long)]
        baseline_accuracy: Option<f64>,
    },
    /// Train the word aligner and write Pharaoh alignments.
    Align {
        #[arg(long, default_value = "alignments.pharaoh")]
        out: PathBuf,
        /// Also write the trained model as JSON.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Induce a bilingual dictionary from the parallel corpus.
    BuildDict {
        #[arg(long, default_value = "dictionary.tsv")]
        out: PathBuf,
    },
    /// Retrieve train-split examples for every evaluated example.
    Retrieve {
        #[arg(long, default_value = "retrieved.jsonl")]
        out: PathBuf,
        /// Write every (query_id, doc_id, score) as TSV.
        #[arg(long)]
        dump_scores: Option<PathBuf>,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Render prompts to stdout, or to JSONL with --out.
    Prompt {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Evaluate one variant; writes eval_<variant>.json and records_<variant>.jsonl.
    Eval {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        markdown: bool,
    },
    /// Paired chi-squared test between two record files.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        #[arg(long)]
        no_correction: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as `compare`, spelled `report --compare A B`.
    #[command(hide = true)]
    Report {
        #[arg(long, num_args = 2, value_names = ["RUN_A", "RUN_B"], required = true)]
        compare: Vec<PathBuf>,
        #[arg(long)]
        no_correction: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recommend an adaptation strategy for a profile.
    Recommend {
        #[arg(long)]
        profile: PathBuf,
        /// JSON thresholds overriding the config file.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage and write a bundle with a manifest.
    Pipeline {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        markdown: bool,
    },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn parse_retrieval(s: &str) -> Result<RetrievalMode, String> {
    s.parse::<RetrievalMode>().map_err(|e| e.to_string())
}

fn parse_split(s: &str) -> Result<lrlkit::corpus::Split, String> {
    s.parse()
}

fn parse_api_style(s: &str) -> Result<ApiStyle, String> {
    match s {
        "completions" => Ok(ApiStyle::Completions),
        "chat" => Ok(ApiStyle::Chat),
        other => Err(format!("unknown api style {other:?}; use completions or chat")),
    }
}

fn cwd_path(p: &PathBuf) -> PathBuf {
    if p.is_absolute() {
        p.clone()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.clone())
    }
}

/// Merge flags into the loaded configuration.
fn apply_overrides(lc: &mut LoadedConfig, g: &GlobalArgs) {
    let c = &mut lc.config;
    if let Some(p) = &g.data {
        c.data.path = Some(cwd_path(p));
    }
    if let Some(p) = &g.parallel {
        c.data.parallel = Some(cwd_path(p));
    }
    if let Some(v) = &g.language_code {
        c.language.code = v.clone();
    }
    if let Some(v) = &g.language_name {
        c.language.name = v.clone();
    }
    if let Some(p) = &g.tokenizer {
        c.tokenizer.path = Some(cwd_path(p));
    }
    if let Some(p) = &g.dictionary {
        c.aligner.dictionary = Some(cwd_path(p));
    }
    if let Some(v) = g.variant {
        c.eval.variant = v;
    }
    if let Some(v) = g.k {
        c.eval.k = Some(v);
    }
    if let Some(v) = g.retrieval {
        c.eval.retrieval = v;
    }
    if let Some(v) = g.seed {
        c.eval.seed = v;
    }
    if let Some(v) = g.concurrency {
        c.eval.concurrency = v;
    }
    if let Some(v) = g.split {
        c.eval.split = v;
    }
    if let Some(v) = g.position {
        c.eval.description_position = v;
    }
    if let Some(v) = g.backend {
        c.backend.kind = v;
    }
    if let Some(v) = g.mock {
        c.backend.kind = BackendKind::Mock;
        c.backend.mock = v;
    }
    if let Some(v) = &g.backend_url {
        c.backend.url = Some(v.clone());
        if g.backend.is_none() && g.mock.is_none() {
            c.backend.kind = BackendKind::Http;
        }
    }
    if let Some(v) = &g.model {
        c.backend.model = Some(v.clone());
    }
    if let Some(v) = &g.api_key {
        c.backend.api_key = Some(v.clone());
    }
    if let Some(v) = g.api_style {
        c.backend.api_style = v;
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    let mut lc = LoadedConfig::load(cli.global.config.as_deref())?;
    apply_overrides(&mut lc, &cli.global);
    let ctx = Ctx::new(lc);
    match cli.command {
        Command::Diagnose { out, baseline_accuracy } => {
            let profile = commands::diagnose(&ctx, baseline_accuracy)?;
            commands::write_profile(&ctx, &out, &profile)?;
            println!("{}", serde_json::to_string_pretty(&profile)?);
            Ok(EXIT_OK)
        }
        Command::Align { out, model_out } => {
            commands::align(&ctx, &out, model_out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::BuildDict { out } => {
            let dict = commands::build_dict(&ctx, &out)?;
            println!("{} entries, coverage {:.3}", dict.len(), dict.coverage);
            Ok(EXIT_OK)
        }
        Command::Retrieve { out, dump_scores, top_k } => {
            commands::retrieve(&ctx, &out, dump_scores.as_deref(), top_k)?;
            Ok(EXIT_OK)
        }
        Command::Prompt { out, limit } => {
            commands::prompt(&ctx, out.as_deref(), limit)?;
            Ok(EXIT_OK)
        }
        Command::Eval { out_dir, markdown } => {
            let o = commands::eval(&ctx, &out_dir, markdown)?;
            println!(
                "{}: accuracy {:.4} ({}/{}), failed {}, majority baseline {:.4}{}",
                o.report.variant,
                o.report.accuracy,
                o.report.correct,
                o.report.n,
                o.report.failed,
                o.report.majority_vote_baseline,
                if o.report.flagged { ", FLAGGED" } else { "" }
            );
            Ok(if o.report.flagged { EXIT_FLAGGED } else { EXIT_OK })
        }
        Command::Compare { run_a, run_b, no_correction, out } => compare(&ctx, &run_a, &run_b, no_correction, out),
        Command::Report { compare: runs, no_correction, out } => compare(&ctx, &runs[0], &runs[1], no_correction, out),
        Command::Recommend { profile, thresholds, out } => {
            let p = commands::read_profile(&profile)?;
            let t = match thresholds {
                Some(path) => commands::read_thresholds(&path)?,
                None => ctx.lc.config.recommend.clone(),
            };
            let rec = commands::recommend_profile(&p, &t)?;
            let text = output::to_json_with_meta(&ctx.meta, &rec)?;
            if let Some(path) = out {
                output::write_json(&path, &ctx.meta, &rec)?;
            }
            print!("{text}");
            Ok(EXIT_OK)
        }
        Command::Pipeline { out_dir, markdown } => {
            let dir = match out_dir {
                Some(d) => d,
                None => ctx.lc.resolve(&ctx.lc.config.pipeline.output_dir),
            };
            let r = pipeline::run(&ctx, &dir, markdown)?;
            println!(
                "pipeline complete: {} artifacts in {}{}",
                r.manifest.artifacts.len(),
                dir.display(),
                if r.flagged { " (FLAGGED)" } else { "" }
            );
            Ok(if r.flagged { EXIT_FLAGGED } else { EXIT_OK })
        }
    }
}

fn compare(ctx: &Ctx, a: &PathBuf, b: &PathBuf, no_correction: bool, out: Option<PathBuf>) -> CliResult<i32> {
    let c = commands::compare_files(a, b, !no_correction)?;
    print!("{}", commands::comparison_text(&c));
    if let Some(path) = out {
        output::write_json(&path, &ctx.meta, &c)?;
    }
    Ok(EXIT_OK)
}

fn main() {
    let cli = Cli::parse();
    let filter = tracing_subscriber::EnvFilter::try_new(&cli.global.log)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    };
    std::process::exit(code);
}
