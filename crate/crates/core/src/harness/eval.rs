//! Running a prompt variant over a dataset split against a backend.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, ScoringBackend};
use super::parse::{choice_letter, parse_choice, parse_label};
use crate::aligner::Dictionary;
use crate::corpus::{Example, LabeledExample, MultiChoiceExample, Task};
use crate::error::{Error, Result};
use crate::promptkit::{
    render_classification, render_multichoice, ClassificationAids, DescriptionPosition, MultiChoiceAids,
    PromptSpec, RenderedPrompt, Variant,
};
use crate::retriever::{derive_seed, sample_random, Bm25Index, RetrievalMode, DEFAULT_B, DEFAULT_K1};
use crate::sha256_hex;

pub const DEFAULT_CONCURRENCY: usize = 4;
pub const CLASSIFICATION_MAX_TOKENS: usize = 16;
pub const MULTICHOICE_MAX_TOKENS: usize = 4;
/// Runs with a larger share of failed examples are flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.01;
const NO_PREDICTION: &str = "<none>";
const FAILED: &str = "<failed>";

/// Delays before each retry of a transport failure; the request is tried
/// once plus once per delay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub delays_ms: Vec<u64>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { delays_ms: vec![500, 2000, 8000] }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy { delays_ms: Vec::new() }
    }

    /// Same number of retries without waiting.
    pub fn immediate(retries: usize) -> Self {
        RetryPolicy { delays_ms: vec![0; retries] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub retrieval: RetrievalMode,
    pub seed: u64,
    pub concurrency: usize,
    pub retry: RetryPolicy,
    /// Overrides the per-task default when set.
    pub max_tokens: Option<usize>,
    pub bm25_k1: f64,
    pub bm25_b: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            retrieval: RetrievalMode::Bm25,
            seed: 0,
            concurrency: DEFAULT_CONCURRENCY,
            retry: RetryPolicy::default(),
            max_tokens: None,
            bm25_k1: DEFAULT_K1,
            bm25_b: DEFAULT_B,
        }
    }
}

/// Optional shared material for rendering.
#[derive(Debug, Clone, Copy, Default)]
pub struct Resources<'a> {
    pub dictionary: Option<&'a Dictionary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub example_id: String,
    pub prompt_sha256: String,
    pub raw_output: Option<String>,
    pub parsed_label: Option<String>,
    pub gold: String,
    pub correct: bool,
    pub status: RecordStatus,
    pub error: Option<String>,
    pub attempts: u32,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSnapshot {
    pub spec: PromptSpec,
    pub retrieval: RetrievalMode,
    pub seed: u64,
    pub concurrency: usize,
    pub retry_delays_ms: Vec<u64>,
    pub max_tokens: usize,
    pub bm25_k1: f64,
    pub bm25_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub variant: Variant,
    pub language_name: String,
    pub k: usize,
    pub description_position: DescriptionPosition,
    /// Correct over scored examples (failed examples excluded).
    pub accuracy: f64,
    /// Scored examples.
    pub n: usize,
    pub correct: usize,
    pub total: usize,
    pub failed: usize,
    /// Scored examples whose output matched no label.
    pub unparsed: usize,
    /// Gold label → predicted label (or `<none>` / `<failed>`) → count.
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    pub majority_label: String,
    pub majority_vote_baseline: f64,
    /// More than 1% of the examples failed at the backend.
    pub flagged: bool,
    pub backend: String,
    pub config: EvalSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub report: EvalReport,
    pub records: Vec<EvalRecord>,
}

/// Task-specific glue between examples, prompts and parsing.
pub trait Evaluable: Example + Sync {
    const TASK: Task;
    const DEFAULT_MAX_TOKENS: usize;

    fn gold(&self) -> String;

    /// Output labels in canonical order.
    fn label_universe(spec: &PromptSpec) -> Vec<String>;

    fn parse(raw: &str, spec: &PromptSpec) -> Option<String>;

    fn render(&self, spec: &PromptSpec, retrieved: &[&Self], resources: Resources<'_>) -> Result<RenderedPrompt>;
}

impl Evaluable for LabeledExample {
    const TASK: Task = Task::Classification;
    const DEFAULT_MAX_TOKENS: usize = CLASSIFICATION_MAX_TOKENS;

    fn gold(&self) -> String {
        self.label.clone()
    }

    fn label_universe(spec: &PromptSpec) -> Vec<String> {
        spec.label_set.labels().to_vec()
    }

    fn parse(raw: &str, spec: &PromptSpec) -> Option<String> {
        parse_label(raw, &spec.label_set)
    }

    fn render(&self, spec: &PromptSpec, retrieved: &[&Self], resources: Resources<'_>) -> Result<RenderedPrompt> {
        let pairs: Vec<(&str, &str)> = retrieved
            .iter()
            .map(|e| (e.text_target.as_str(), e.text_english.as_deref().unwrap_or("")))
            .collect();
        render_classification(
            spec,
            &self.text_target,
            ClassificationAids {
                dictionary: resources.dictionary,
                pairs: &pairs,
                demos: retrieved,
            },
        )
    }
}

impl Evaluable for MultiChoiceExample {
    const TASK: Task = Task::Multichoice;
    const DEFAULT_MAX_TOKENS: usize = MULTICHOICE_MAX_TOKENS;

    fn gold(&self) -> String {
        choice_letter(self.answer_index).map(String::from).unwrap_or_default()
    }

    fn label_universe(_spec: &PromptSpec) -> Vec<String> {
        ["A", "B", "C", "D"].map(String::from).to_vec()
    }

    fn parse(raw: &str, _spec: &PromptSpec) -> Option<String> {
        parse_choice(raw, 4).and_then(choice_letter).map(String::from)
    }

    fn render(&self, spec: &PromptSpec, retrieved: &[&Self], resources: Resources<'_>) -> Result<RenderedPrompt> {
        let pairs: Vec<(&str, &str)> = retrieved
            .iter()
            .map(|e| (e.passage_target.as_str(), e.passage_english.as_deref().unwrap_or("")))
            .collect();
        render_multichoice(
            spec,
            self,
            MultiChoiceAids {
                dictionary: resources.dictionary,
                passage_pairs: &pairs,
                demos: retrieved,
            },
        )
    }
}

/// Fail when any evaluated id also sits in the retrieval pool.
pub fn check_leakage<'a, P, E>(pool_ids: P, eval_ids: E) -> Result<()>
where
    P: IntoIterator<Item = &'a str>,
    E: IntoIterator<Item = &'a str>,
{
    let pool: BTreeSet<&str> = pool_ids.into_iter().collect();
    let shared: Vec<String> = eval_ids
        .into_iter()
        .filter(|id| pool.contains(id))
        .map(str::to_string)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(Error::Leakage(shared))
    }
}

struct Job {
    id: String,
    prompt: String,
    gold: String,
}

/// Pick `k` pool indices for one query.
fn retrieve<T: Example>(
    index: Option<&Bm25Index>,
    pool: &[&T],
    query: &T,
    k: usize,
    cfg: &EvalConfig,
) -> Result<Vec<usize>> {
    match (cfg.retrieval, index) {
        (RetrievalMode::Bm25, Some(ix)) => Ok(ix
            .query(query.target_text(), k)?
            .into_iter()
            .map(|d| d.doc_id)
            .collect()),
        _ => sample_random(pool.len(), k, derive_seed(cfg.seed, query.id())),
    }
}

/// A rendered prompt for one evaluated example.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedItem {
    pub id: String,
    pub gold: String,
    pub prompt: RenderedPrompt,
}

/// Render the prompt of every item exactly as [`run_eval`] would send it,
/// retrieving from `pool` only.
pub fn render_prompts<T: Evaluable>(
    pool: &[&T],
    items: &[&T],
    spec: &PromptSpec,
    resources: Resources<'_>,
    cfg: &EvalConfig,
) -> Result<Vec<RenderedItem>> {
    spec.validate()?;
    check_leakage(pool.iter().map(|e| e.id()), items.iter().map(|e| e.id()))?;
    let needs_english = matches!(spec.variant, Variant::SentenceAlignment | Variant::FewshotAligned);
    let pool: Vec<&T> = pool
        .iter()
        .copied()
        .filter(|e| !needs_english || e.english_text().is_some_and(|t| !t.trim().is_empty()))
        .collect();
    let index = if spec.variant.is_zero_shot() {
        None
    } else {
        if pool.len() < spec.k {
            return Err(Error::InvalidArgument(format!(
                "{} needs {} retrieved examples but the pool has {} usable entries",
                spec.variant,
                spec.k,
                pool.len()
            )));
        }
        match cfg.retrieval {
            RetrievalMode::Bm25 => {
                let texts: Vec<&str> = pool.iter().map(|e| e.target_text()).collect();
                Some(Bm25Index::new(&texts, cfg.bm25_k1, cfg.bm25_b)?)
            }
            RetrievalMode::Random => None,
        }
    };
    items
        .iter()
        .map(|item| {
            let retrieved: Vec<&T> = if spec.variant.is_zero_shot() {
                Vec::new()
            } else {
                retrieve(index.as_ref(), &pool, *item, spec.k, cfg)?
                    .into_iter()
                    .map(|i| pool[i])
                    .collect()
            };
            Ok(RenderedItem {
                id: item.id().to_string(),
                gold: item.gold(),
                prompt: item.render(spec, &retrieved, resources)?,
            })
        })
        .collect()
}

fn build_jobs<T: Evaluable>(
    pool: &[&T],
    items: &[&T],
    spec: &PromptSpec,
    resources: Resources<'_>,
    cfg: &EvalConfig,
) -> Result<Vec<Job>> {
    Ok(render_prompts(pool, items, spec, resources, cfg)?
        .into_iter()
        .map(|r| Job { id: r.id, prompt: r.prompt.text, gold: r.gold })
        .collect())
}

fn call_with_retry<B: ScoringBackend + ?Sized>(
    backend: &B,
    prompt: &str,
    max_tokens: usize,
    retry: &RetryPolicy,
) -> (std::result::Result<String, BackendError>, u32) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        match backend.generate(prompt, max_tokens) {
            Ok(out) => return (Ok(out), attempts),
            Err(e) if e.is_transport() && (attempts as usize) <= retry.delays_ms.len() => {
                let delay = retry.delays_ms[attempts as usize - 1];
                tracing::warn!(attempt = attempts, delay_ms = delay, error = %e, "retrying backend call");
                std::thread::sleep(Duration::from_millis(delay));
            }
            Err(e) => return (Err(e), attempts),
        }
    }
}

fn execute<T: Evaluable, B: ScoringBackend + ?Sized>(
    jobs: &[Job],
    spec: &PromptSpec,
    backend: &B,
    max_tokens: usize,
    cfg: &EvalConfig,
) -> Vec<EvalRecord> {
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, EvalRecord)>> = Mutex::new(Vec::with_capacity(jobs.len()));
    let workers = cfg.concurrency.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(idx) else { break };
                let start = Instant::now();
                let (result, attempts) = call_with_retry(backend, &job.prompt, max_tokens, &cfg.retry);
                let latency_ms = start.elapsed().as_millis() as u64;
                let record = match result {
                    Ok(raw) => {
                        let parsed = T::parse(&raw, spec);
                        EvalRecord {
                            example_id: job.id.clone(),
                            prompt_sha256: sha256_hex(job.prompt.as_bytes()),
                            correct: parsed.as_deref() == Some(job.gold.as_str()),
                            raw_output: Some(raw),
                            parsed_label: parsed,
                            gold: job.gold.clone(),
                            status: RecordStatus::Ok,
                            error: None,
                            attempts,
                            latency_ms,
                        }
                    }
                    Err(e) => EvalRecord {
                        example_id: job.id.clone(),
                        prompt_sha256: sha256_hex(job.prompt.as_bytes()),
                        raw_output: None,
                        parsed_label: None,
                        gold: job.gold.clone(),
                        correct: false,
                        status: RecordStatus::Failed,
                        error: Some(e.to_string()),
                        attempts,
                        latency_ms,
                    },
                };
                done.lock().expect("record lock").push((idx, record));
            });
        }
    });
    let mut done = done.into_inner().expect("record lock");
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

fn summarize<T: Evaluable>(
    records: &[EvalRecord],
    spec: &PromptSpec,
    backend: String,
    snapshot: EvalSnapshot,
) -> Result<EvalReport> {
    let total = records.len();
    let failed = records.iter().filter(|r| r.status == RecordStatus::Failed).count();
    if failed == total {
        return Err(Error::BackendUnreachable {
            failed,
            total,
            last: records
                .last()
                .and_then(|r| r.error.clone())
                .unwrap_or_else(|| "no examples".into()),
        });
    }
    let scored = total - failed;
    let correct = records.iter().filter(|r| r.correct).count();
    let unparsed = records
        .iter()
        .filter(|r| r.status == RecordStatus::Ok && r.parsed_label.is_none())
        .count();
    let universe = T::label_universe(spec);
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut gold_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        let predicted = match (&r.status, &r.parsed_label) {
            (RecordStatus::Failed, _) => FAILED.to_string(),
            (_, Some(p)) => p.clone(),
            (_, None) => NO_PREDICTION.to_string(),
        };
        *confusion.entry(r.gold.clone()).or_default().entry(predicted).or_insert(0) += 1;
        *gold_counts.entry(r.gold.as_str()).or_insert(0) += 1;
    }
    let (majority_label, majority_count) = universe
        .iter()
        .map(|l| (l.clone(), gold_counts.get(l.as_str()).copied().unwrap_or(0)))
        .fold((String::new(), 0usize), |best, cur| if cur.1 > best.1 { cur } else { best });
    let failure_rate = failed as f64 / total as f64;
    Ok(EvalReport {
        task: T::TASK,
        variant: spec.variant,
        language_name: spec.language_name.clone(),
        k: spec.k,
        description_position: spec.description_position,
        accuracy: correct as f64 / scored as f64,
        n: scored,
        correct,
        total,
        failed,
        unparsed,
        confusion,
        majority_label,
        majority_vote_baseline: majority_count as f64 / total as f64,
        flagged: failure_rate > FAILURE_FLAG_RATE,
        backend,
        config: snapshot,
    })
}

/// Evaluate `items` with demonstrations and sentence pairs retrieved from
/// `pool` only.
pub fn run_eval<T: Evaluable, B: ScoringBackend + ?Sized>(
    pool: &[&T],
    items: &[&T],
    spec: &PromptSpec,
    resources: Resources<'_>,
    cfg: &EvalConfig,
    backend: &B,
) -> Result<EvalRun> {
    if spec.task != T::TASK {
        return Err(Error::PromptSpec(format!("spec task {:?} does not match the data", spec.task)));
    }
    spec.validate()?;
    if items.is_empty() {
        return Err(Error::EmptyInput("evaluation split"));
    }
    check_leakage(pool.iter().map(|e| e.id()), items.iter().map(|e| e.id()))?;
    let max_tokens = cfg.max_tokens.unwrap_or(T::DEFAULT_MAX_TOKENS);
    let jobs = build_jobs(pool, items, spec, resources, cfg)?;
    let records = execute::<T, B>(&jobs, spec, backend, max_tokens, cfg);
    let snapshot = EvalSnapshot {
        spec: spec.clone(),
        retrieval: cfg.retrieval,
        seed: cfg.seed,
        concurrency: cfg.concurrency,
        retry_delays_ms: cfg.retry.delays_ms.clone(),
        max_tokens,
        bm25_k1: cfg.bm25_k1,
        bm25_b: cfg.bm25_b,
    };
    let report = summarize::<T>(&records, spec, backend.identity(), snapshot)?;
    if report.flagged {
        tracing::warn!(failed = report.failed, total = report.total, "evaluation flagged as non-comparable");
    }
    Ok(EvalRun { report, records })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionSelection {
    pub position: DescriptionPosition,
    pub before_accuracy: f64,
    pub after_accuracy: f64,
}

/// Evaluate both description positions on `dev` and keep the better one;
/// ties keep the description before the examples.
pub fn select_description_position<T: Evaluable, B: ScoringBackend + ?Sized>(
    pool: &[&T],
    dev: &[&T],
    spec: &PromptSpec,
    resources: Resources<'_>,
    cfg: &EvalConfig,
    backend: &B,
) -> Result<PositionSelection> {
    if dev.is_empty() {
        return Err(Error::EmptyInput("dev split for description-position selection"));
    }
    let before = spec.clone().with_position(DescriptionPosition::BeforeExamples);
    let after = spec.clone().with_position(DescriptionPosition::AfterExamples);
    let before_accuracy = run_eval(pool, dev, &before, resources, cfg, backend)?.report.accuracy;
    let after_accuracy = run_eval(pool, dev, &after, resources, cfg, backend)?.report.accuracy;
    let position = if after_accuracy > before_accuracy {
        DescriptionPosition::AfterExamples
    } else {
        DescriptionPosition::BeforeExamples
    };
    Ok(PositionSelection { position, before_accuracy, after_accuracy })
}
