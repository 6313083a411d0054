//! Subcommand implementations shared by the individual commands and the
//! pipeline.

use std::path::Path;

use lrlkit::aligner::{extract_dictionary, train, AlignmentModel, Dictionary};
use lrlkit::corpus::{
    load_dataset, make_parallel, Dataset, Example, Format, LoadedDataset, ParallelCorpus, Split,
};
use lrlkit::harness::{
    render_prompts, run_eval, select_description_position, EvalRecord, EvalReport, Evaluable, PositionSelection,
    RecordStatus, Resources, ScoringBackend,
};
use lrlkit::promptkit::{DescriptionPosition, PromptSpec, Variant};
use lrlkit::recommender::{rank_strategies, recommend, Category, Recommendation, Thresholds};
use lrlkit::retriever::{derive_seed, sample_random, Bm25Index, RetrievalMode};
use lrlkit::stats::{paired_chi_squared, ChiSquaredResult};
use lrlkit::tokmetrics::{profile_language, LanguageProfile, TokenizerHandle};
use serde::{Deserialize, Serialize};

use crate::backend::{build_backend, OracleKeys};
use crate::config::{LoadedConfig, PositionChoice};
use crate::error::{CliError, CliResult};
use crate::output::{read_jsonl, write_json, write_jsonl, write_plain, write_text, Meta};

/// Loaded configuration plus the metadata stamped on every output.
pub struct Ctx {
    pub lc: LoadedConfig,
    pub meta: Meta,
}

impl Ctx {
    pub fn new(lc: LoadedConfig) -> Self {
        let meta = Meta::new(lc.hash(), lc.config.eval.seed);
        Ctx { lc, meta }
    }

    fn cfg(&self) -> &crate::config::RunConfig {
        &self.lc.config
    }
}

// ------------------------------------------------------------------ inputs

pub fn load_data(ctx: &Ctx) -> CliResult<LoadedDataset> {
    let path = ctx.lc.data_path()?;
    if !path.exists() {
        return Err(CliError::Config {
            path: path.clone(),
            message: "dataset file does not exist".into(),
        });
    }
    let format = ctx.cfg().data.format.unwrap_or_else(|| Format::from_path(&path));
    Ok(load_dataset(&path, format, ctx.cfg().data.task, &ctx.lc.labels()?)?)
}

fn train_parallel(data: &LoadedDataset, code: &str) -> CliResult<ParallelCorpus> {
    let extraction = match data {
        LoadedDataset::Classification(d) => make_parallel(d.split(Split::Train), code)?,
        LoadedDataset::Multichoice(d) => make_parallel(d.split(Split::Train), code)?,
    };
    Ok(extraction.corpus)
}

/// The configured parallel corpus, or the train split's English sides.
pub fn parallel_corpus(ctx: &Ctx, data: Option<&LoadedDataset>) -> CliResult<ParallelCorpus> {
    let (code, _) = ctx.lc.require_language()?;
    if let Some(p) = &ctx.cfg().data.parallel {
        let path = ctx.lc.resolve(p);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        return Ok(ParallelCorpus::from_fast_align(code, &text)?);
    }
    match data {
        Some(d) => train_parallel(d, code),
        None => train_parallel(&load_data(ctx)?, code),
    }
}

pub fn load_tokenizer(ctx: &Ctx) -> CliResult<TokenizerHandle> {
    let t = &ctx.cfg().tokenizer;
    if let Some(p) = &t.path {
        let path = ctx.lc.resolve(p);
        if !path.exists() {
            return Err(CliError::Config { path, message: "tokenizer file does not exist".into() });
        }
        return Ok(TokenizerHandle::from_file(&path)?);
    }
    if let Some(url) = &t.url {
        return Ok(TokenizerHandle::from_url(url)?);
    }
    Err(ctx.lc.missing("tokenizer.path or tokenizer.url"))
}

pub fn train_model(ctx: &Ctx, corpus: &ParallelCorpus) -> CliResult<AlignmentModel> {
    Ok(train(corpus, &ctx.cfg().aligner.train_options())?)
}

/// The user-supplied dictionary, or one induced from the parallel corpus.
pub fn obtain_dictionary(ctx: &Ctx, data: Option<&LoadedDataset>) -> CliResult<Dictionary> {
    if let Some(p) = &ctx.cfg().aligner.dictionary {
        let path = ctx.lc.resolve(p);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        return Ok(Dictionary::from_tsv(&text)?);
    }
    let corpus = parallel_corpus(ctx, data)?;
    let model = train_model(ctx, &corpus)?;
    Ok(extract_dictionary(&model, &corpus)?)
}

pub fn spec_for(ctx: &Ctx, variant: Variant, task: lrlkit::corpus::Task) -> CliResult<PromptSpec> {
    let (_, name) = ctx.lc.require_language()?;
    let spec = PromptSpec::new(variant, name, task, ctx.cfg().eval.k_for(variant)).with_labels(ctx.lc.labels()?);
    spec.validate()?;
    Ok(spec)
}

fn task_of(data: &LoadedDataset) -> lrlkit::corpus::Task {
    match data {
        LoadedDataset::Classification(_) => lrlkit::corpus::Task::Classification,
        LoadedDataset::Multichoice(_) => lrlkit::corpus::Task::Multichoice,
    }
}

// ------------------------------------------------------------------ diagnose

pub fn diagnose(ctx: &Ctx, baseline_accuracy: Option<f64>) -> CliResult<LanguageProfile> {
    let tok = load_tokenizer(ctx)?;
    let data = if ctx.cfg().data.parallel.is_some() { None } else { Some(load_data(ctx)?) };
    let corpus = parallel_corpus(ctx, data.as_ref())?;
    let spec = PromptSpec::new(Variant::BaselineZero, "-", lrlkit::corpus::Task::Classification, 0);
    let backend = build_backend(&ctx.lc, data.as_ref(), None, &spec)?;
    let mut profile = profile_language(&corpus, &tok, backend.as_ref())?;
    profile.baseline_accuracy = baseline_accuracy;
    Ok(profile)
}

pub fn write_profile(ctx: &Ctx, path: &Path, profile: &LanguageProfile) -> CliResult<()> {
    write_json(path, &ctx.meta, profile)
}

// ------------------------------------------------------------------ align

pub fn alignments_text(model: &AlignmentModel, corpus: &ParallelCorpus) -> CliResult<String> {
    let mut out = String::new();
    for p in corpus.pairs() {
        out.push_str(&model.viterbi_align(&p.target, &p.english)?.pharaoh());
        out.push('\n');
    }
    Ok(out)
}

pub fn write_model(ctx: &Ctx, path: &Path, model: &AlignmentModel) -> CliResult<()> {
    let value: serde_json::Value = serde_json::from_str(&model.to_json())?;
    write_json(path, &ctx.meta, &value)
}

pub fn align(ctx: &Ctx, out: &Path, model_out: Option<&Path>) -> CliResult<()> {
    let corpus = parallel_corpus(ctx, None)?;
    let model = train_model(ctx, &corpus)?;
    write_text(out, &ctx.meta, &alignments_text(&model, &corpus)?)?;
    if let Some(m) = model_out {
        write_model(ctx, m, &model)?;
    }
    tracing::info!(pairs = corpus.len(), tension = model.tension, "alignment written");
    Ok(())
}

pub fn build_dict(ctx: &Ctx, out: &Path) -> CliResult<Dictionary> {
    let corpus = parallel_corpus(ctx, None)?;
    let model = train_model(ctx, &corpus)?;
    let dict = extract_dictionary(&model, &corpus)?;
    write_text(out, &ctx.meta, &dict.to_tsv())?;
    Ok(dict)
}

// ------------------------------------------------------------------ retrieve

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrievedDoc {
    pub rank: usize,
    pub doc_id: String,
    /// BM25 score; absent for random sampling.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrievalRow {
    pub query_id: String,
    pub retrieved: Vec<RetrievedDoc>,
}

fn retrieve_generic<T: Example>(
    ctx: &Ctx,
    data: &Dataset<T>,
    top_k: usize,
    all_scores: bool,
) -> CliResult<(Vec<RetrievalRow>, Vec<(String, String, f64)>)> {
    let e = &ctx.cfg().eval;
    let pool = data.split(Split::Train);
    let queries = data.split(e.split);
    lrlkit::harness::check_leakage(pool.iter().map(|x| x.id()), queries.iter().map(|x| x.id()))?;
    let mut rows = Vec::new();
    let mut dump = Vec::new();
    match e.retrieval {
        RetrievalMode::Bm25 => {
            let texts: Vec<&str> = pool.iter().map(|x| x.target_text()).collect();
            let index = Bm25Index::new(&texts, e.bm25_k1, e.bm25_b)?;
            for q in &queries {
                let ranked = index.query(q.target_text(), pool.len())?;
                if all_scores {
                    for d in &ranked {
                        dump.push((q.id().to_string(), pool[d.doc_id].id().to_string(), d.score));
                    }
                }
                let retrieved = ranked
                    .iter()
                    .take(top_k)
                    .enumerate()
                    .map(|(rank, d)| RetrievedDoc { rank, doc_id: pool[d.doc_id].id().to_string(), score: Some(d.score) })
                    .collect();
                rows.push(RetrievalRow { query_id: q.id().to_string(), retrieved });
            }
        }
        RetrievalMode::Random => {
            for q in &queries {
                let ids = sample_random(pool.len(), top_k, derive_seed(e.seed, q.id()))?;
                let retrieved = ids
                    .into_iter()
                    .enumerate()
                    .map(|(rank, i)| RetrievedDoc { rank, doc_id: pool[i].id().to_string(), score: None })
                    .collect();
                rows.push(RetrievalRow { query_id: q.id().to_string(), retrieved });
            }
        }
    }
    Ok((rows, dump))
}

pub fn retrieve(ctx: &Ctx, out: &Path, dump_scores: Option<&Path>, top_k: Option<usize>) -> CliResult<()> {
    let data = load_data(ctx)?;
    let k = top_k.or(ctx.cfg().eval.k).unwrap_or(5);
    let (rows, dump) = match &data {
        LoadedDataset::Classification(d) => retrieve_generic(ctx, d, k, dump_scores.is_some())?,
        LoadedDataset::Multichoice(d) => retrieve_generic(ctx, d, k, dump_scores.is_some())?,
    };
    write_jsonl(out, &ctx.meta, &rows)?;
    if let Some(path) = dump_scores {
        if ctx.cfg().eval.retrieval == RetrievalMode::Random {
            return Err(CliError::Invalid("--dump-scores needs bm25 retrieval".into()));
        }
        let mut body = String::from("query_id\tdoc_id\tscore\n");
        for (q, d, s) in dump {
            body.push_str(&format!("{q}\t{d}\t{s}\n"));
        }
        write_text(path, &ctx.meta, &body)?;
    }
    Ok(())
}

// ------------------------------------------------------------------ prompt

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptRow {
    pub id: String,
    pub variant: Variant,
    pub text: String,
}

fn fixed_position(choice: PositionChoice) -> DescriptionPosition {
    match choice {
        PositionChoice::AfterExamples => DescriptionPosition::AfterExamples,
        _ => DescriptionPosition::BeforeExamples,
    }
}

fn prompts_generic<T: Evaluable>(
    ctx: &Ctx,
    data: &Dataset<T>,
    spec: &PromptSpec,
    dict: Option<&Dictionary>,
) -> CliResult<Vec<PromptRow>> {
    let pool = data.split(Split::Train);
    let items = data.split(ctx.cfg().eval.split);
    let rendered = render_prompts(&pool, &items, spec, Resources { dictionary: dict }, &ctx.cfg().eval.eval_config())?;
    Ok(rendered
        .into_iter()
        .map(|r| PromptRow { id: r.id, variant: spec.variant, text: r.prompt.text })
        .collect())
}

pub fn prompt(ctx: &Ctx, out: Option<&Path>, limit: Option<usize>) -> CliResult<()> {
    let data = load_data(ctx)?;
    let variant = ctx.cfg().eval.variant;
    let spec = spec_for(ctx, variant, task_of(&data))?
        .with_position(fixed_position(ctx.cfg().eval.description_position));
    let dict = if variant.needs_dictionary() { Some(obtain_dictionary(ctx, Some(&data))?) } else { None };
    let mut rows = match &data {
        LoadedDataset::Classification(d) => prompts_generic(ctx, d, &spec, dict.as_ref())?,
        LoadedDataset::Multichoice(d) => prompts_generic(ctx, d, &spec, dict.as_ref())?,
    };
    if let Some(n) = limit {
        rows.truncate(n);
    }
    match out {
        Some(path) => write_jsonl(path, &ctx.meta, &rows),
        None => {
            for r in &rows {
                println!("===== {} ({}) =====\n{}\n", r.id, r.variant, r.text);
            }
            Ok(())
        }
    }
}

// ------------------------------------------------------------------ eval

pub struct EvalOutcome {
    pub report: EvalReport,
    pub records: Vec<EvalRecord>,
    pub selection: Option<PositionSelection>,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    #[serde(flatten)]
    report: &'a EvalReport,
    position_selection: Option<&'a PositionSelection>,
}

fn eval_generic<T: Evaluable + OracleKeys>(
    ctx: &Ctx,
    data: &Dataset<T>,
    spec: &PromptSpec,
    dict: Option<&Dictionary>,
    backend: &dyn ScoringBackend,
) -> CliResult<EvalOutcome> {
    let e = &ctx.cfg().eval;
    let cfg = e.eval_config();
    let pool = data.split(Split::Train);
    let items = data.split(e.split);
    let resources = Resources { dictionary: dict };
    let mut spec = spec.clone();
    let mut selection = None;
    if spec.variant.is_fewshot() {
        match e.description_position {
            PositionChoice::Auto => {
                let dev = data.split(Split::Dev);
                if dev.is_empty() || e.split == Split::Dev {
                    tracing::warn!("no separate dev split; keeping the description before the examples");
                } else {
                    let sel = select_description_position(&pool, &dev, &spec, resources, &cfg, backend)?;
                    spec = spec.with_position(sel.position);
                    selection = Some(sel);
                }
            }
            other => spec = spec.with_position(fixed_position(other)),
        }
    }
    let run = run_eval(&pool, &items, &spec, resources, &cfg, backend)?;
    Ok(EvalOutcome { report: run.report, records: run.records, selection })
}

/// Evaluate one variant on already loaded data.
pub fn eval_variant(
    ctx: &Ctx,
    data: &LoadedDataset,
    variant: Variant,
    dict: Option<&Dictionary>,
) -> CliResult<EvalOutcome> {
    let spec = spec_for(ctx, variant, task_of(data))?;
    let backend = build_backend(&ctx.lc, Some(data), dict, &spec)?;
    match data {
        LoadedDataset::Classification(d) => eval_generic(ctx, d, &spec, dict, backend.as_ref()),
        LoadedDataset::Multichoice(d) => eval_generic(ctx, d, &spec, dict, backend.as_ref()),
    }
}

pub fn write_eval(ctx: &Ctx, report_path: &Path, records_path: &Path, outcome: &EvalOutcome) -> CliResult<()> {
    write_json(
        report_path,
        &ctx.meta,
        &ReportFile { report: &outcome.report, position_selection: outcome.selection.as_ref() },
    )?;
    write_jsonl(records_path, &ctx.meta, &outcome.records)
}

pub fn eval(ctx: &Ctx, out_dir: &Path, markdown: bool) -> CliResult<EvalOutcome> {
    let data = load_data(ctx)?;
    let variant = ctx.cfg().eval.variant;
    let dict = if variant.needs_dictionary() { Some(obtain_dictionary(ctx, Some(&data))?) } else { None };
    let outcome = eval_variant(ctx, &data, variant, dict.as_ref())?;
    let stem = variant.as_str();
    write_eval(
        ctx,
        &out_dir.join(format!("eval_{stem}.json")),
        &out_dir.join(format!("records_{stem}.jsonl")),
        &outcome,
    )?;
    if markdown {
        let md = eval_markdown(&[(variant, &outcome.report)], None, None);
        write_plain(&out_dir.join("summary.md"), &md)?;
    }
    Ok(outcome)
}

// ------------------------------------------------------------------ compare

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub run_a: String,
    pub run_b: String,
    /// Examples answered by both runs.
    pub n: usize,
    /// Examples left out because either run failed on them.
    pub excluded_failed: usize,
    #[serde(flatten)]
    pub result: ChiSquaredResult,
}

pub fn compare_records(
    a_label: &str,
    a: &[EvalRecord],
    b_label: &str,
    b: &[EvalRecord],
    continuity_correction: bool,
) -> CliResult<Comparison> {
    use std::collections::BTreeSet;
    let failed: BTreeSet<&str> = a
        .iter()
        .chain(b)
        .filter(|r| r.status == RecordStatus::Failed)
        .map(|r| r.example_id.as_str())
        .collect();
    let keep = |rs: &[EvalRecord]| -> Vec<(String, bool)> {
        rs.iter()
            .filter(|r| !failed.contains(r.example_id.as_str()))
            .map(|r| (r.example_id.clone(), r.correct))
            .collect()
    };
    let (ka, kb) = (keep(a), keep(b));
    let result = paired_chi_squared(
        ka.iter().map(|(i, c)| (i.as_str(), *c)),
        kb.iter().map(|(i, c)| (i.as_str(), *c)),
        continuity_correction,
    )?;
    Ok(Comparison {
        run_a: a_label.to_string(),
        run_b: b_label.to_string(),
        n: ka.len(),
        excluded_failed: failed.len(),
        result,
    })
}

pub fn compare_files(a: &Path, b: &Path, continuity_correction: bool) -> CliResult<Comparison> {
    let ra: Vec<EvalRecord> = read_jsonl(a)?;
    let rb: Vec<EvalRecord> = read_jsonl(b)?;
    compare_records(&a.display().to_string(), &ra, &b.display().to_string(), &rb, continuity_correction)
}

pub fn comparison_text(c: &Comparison) -> String {
    let t = &c.result.table;
    format!(
        "A = {}\nB = {}\nn = {} (excluded after failures: {})\nstatistic = {:.6}\np_value = {:.6}\ncontinuity_correction = {}\n\n\
                 B correct   B wrong\nA correct   {:>9}   {:>7}\nA wrong     {:>9}   {:>7}\n",
        c.run_a,
        c.run_b,
        c.n,
        c.excluded_failed,
        c.result.statistic,
        c.result.p_value,
        c.result.continuity_correction,
        t.both_correct,
        t.b,
        t.c,
        t.both_wrong
    )
}

// ------------------------------------------------------------------ recommend

pub fn read_profile(path: &Path) -> CliResult<LanguageProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn read_thresholds(path: &Path) -> CliResult<Thresholds> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn recommend_profile(profile: &LanguageProfile, thresholds: &Thresholds) -> CliResult<Recommendation> {
    Ok(recommend(profile, thresholds)?)
}

// ------------------------------------------------------------------ markdown

/// Category table in the layout of the strategy-selection figure, with the
/// language's own category marked.
pub fn category_table(current: Option<Category>) -> String {
    let mut out = String::from("| Category | Ranking | Data investment |\n|---|---|---|\n");
    for c in Category::ALL {
        let r = rank_strategies(c);
        let ranking: Vec<&str> = r.ranking.iter().map(|s| s.as_str()).collect();
        let mark = if Some(c) == current { " **(this language)**" } else { "" };
        out.push_str(&format!(
            "| {}{} | {} | {} |\n",
            c.as_str(),
            mark,
            ranking.join(" > "),
            serde_json::to_value(r.data_investment).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        ));
    }
    out
}

pub fn eval_markdown(
    reports: &[(Variant, &EvalReport)],
    profile: Option<&LanguageProfile>,
    rec: Option<&Recommendation>,
) -> String {
    let mut out = String::from("# lrlkit summary\n\n");
    if let Some(p) = profile {
        out.push_str(&format!(
            "Language `{}`: IP {:.3}, TBR {:.3}, TP {:.3}, n = {}.\n\n",
            p.language, p.ip, p.tbr, p.tp, p.n
        ));
    }
    out.push_str("| Variant | Accuracy | n | Failed | Majority baseline | Flagged |\n|---|---|---|---|---|---|\n");
    for (v, r) in reports {
        out.push_str(&format!(
            "| {} | {:.3} | {} | {} | {:.3} | {} |\n",
            v, r.accuracy, r.n, r.failed, r.majority_vote_baseline, r.flagged
        ));
    }
    out.push('\n');
    out.push_str(&category_table(rec.map(|r| r.category)));
    if let Some(r) = rec {
        out.push_str(&format!("\n{}", r.explanation));
    }
    out
}
