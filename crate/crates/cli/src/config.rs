//! Run configuration: one TOML file plus command-line overrides.
//!
//! Relative paths in the file resolve against the file's directory; paths
//! given as flags resolve against the working directory. The config hash is
//! the SHA-256 of the canonical JSON form of the merged configuration with
//! paths as written, leaving out the API key and the output directory.

use std::path::{Path, PathBuf};

use lrlkit::aligner::{Smoothing, TrainOptions};
use lrlkit::corpus::{Format, Split, Task, TaskLabelSet};
use lrlkit::harness::{ApiStyle, EvalConfig, RetryPolicy};
use lrlkit::promptkit::{DescriptionPosition, Variant};
use lrlkit::recommender::Thresholds;
use lrlkit::retriever::{RetrievalMode, DEFAULT_B, DEFAULT_K1};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub language: LanguageSection,
    pub data: DataSection,
    pub tokenizer: TokenizerSection,
    pub backend: BackendSection,
    pub eval: EvalSection,
    pub aligner: AlignerSection,
    pub pipeline: PipelineSection,
    pub recommend: Thresholds,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanguageSection {
    /// Code such as `nqo_Nkoo`.
    pub code: String,
    /// Display name used in prompts, such as `Nko`.
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub task: Task,
    pub format: Option<Format>,
    /// Classification label set; the SIB-200 topics when absent.
    pub labels: Option<Vec<String>>,
    /// Parallel corpus in `target ||| english` form; when absent the train
    /// split's English sides are used.
    pub parallel: Option<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection { path: None, task: Task::Classification, format: None, labels: None, parallel: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerSection {
    pub path: Option<PathBuf>,
    pub url: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

/// What the bundled mock backend answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MockMode {
    /// The gold answer of whichever dataset input the prompt ends with.
    #[default]
    Oracle,
    /// The fixed `constant_output` string.
    Constant,
    /// The most frequent gold answer of the train split.
    Majority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub kind: BackendKind,
    pub mock: MockMode,
    pub constant_output: String,
    pub url: Option<String>,
    pub model: Option<String>,
    pub api_style: ApiStyle,
    /// Prefer the LRLKIT_API_KEY environment variable; never hashed or
    /// written to outputs.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            kind: BackendKind::Mock,
            mock: MockMode::Oracle,
            constant_output: "I cannot tell.".into(),
            url: None,
            model: None,
            api_style: ApiStyle::Completions,
            api_key: None,
        }
    }
}

/// Description position for few-shot variants; `auto` selects it on the
/// dev split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionChoice {
    #[default]
    Auto,
    BeforeExamples,
    AfterExamples,
}

impl std::str::FromStr for PositionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(PositionChoice::Auto),
            other => other
                .parse::<DescriptionPosition>()
                .map(|p| match p {
                    DescriptionPosition::BeforeExamples => PositionChoice::BeforeExamples,
                    DescriptionPosition::AfterExamples => PositionChoice::AfterExamples,
                })
                .map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub variant: Variant,
    pub k: Option<usize>,
    pub retrieval: RetrievalMode,
    pub seed: u64,
    pub concurrency: usize,
    pub split: Split,
    pub description_position: PositionChoice,
    pub retry_delays_ms: Vec<u64>,
    pub max_tokens: Option<usize>,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    /// Apply the continuity correction in paired comparisons.
    pub continuity_correction: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            variant: Variant::BaselineZero,
            k: None,
            retrieval: RetrievalMode::Bm25,
            seed: 0,
            concurrency: lrlkit::harness::eval::DEFAULT_CONCURRENCY,
            split: Split::Test,
            description_position: PositionChoice::Auto,
            retry_delays_ms: RetryPolicy::default().delays_ms,
            max_tokens: None,
            bm25_k1: DEFAULT_K1,
            bm25_b: DEFAULT_B,
            continuity_correction: true,
        }
    }
}

/// Default number of retrieved examples for a variant.
pub fn default_k(variant: Variant) -> usize {
    match variant {
        v if v.is_zero_shot() => 0,
        _ => 1,
    }
}

impl EvalSection {
    pub fn k_for(&self, variant: Variant) -> usize {
        if variant.is_zero_shot() {
            0
        } else {
            self.k.unwrap_or_else(|| default_k(variant))
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            retrieval: self.retrieval,
            seed: self.seed,
            concurrency: self.concurrency,
            retry: RetryPolicy { delays_ms: self.retry_delays_ms.clone() },
            max_tokens: self.max_tokens,
            bm25_k1: self.bm25_k1,
            bm25_b: self.bm25_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingKind {
    None,
    #[default]
    Variational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignerSection {
    pub iterations: usize,
    pub initial_tension: f64,
    pub optimize_tension: bool,
    pub null_prob: f64,
    pub smoothing: SmoothingKind,
    pub alpha: f64,
    pub favor_diagonal: bool,
    pub max_sentence_len: usize,
    /// Use this dictionary TSV instead of training one.
    pub dictionary: Option<PathBuf>,
}

impl Default for AlignerSection {
    fn default() -> Self {
        let t = TrainOptions::default();
        let alpha = match t.smoothing {
            Smoothing::Variational { alpha } => alpha,
            Smoothing::None => 0.01,
        };
        AlignerSection {
            iterations: t.iterations,
            initial_tension: t.initial_tension,
            optimize_tension: t.optimize_tension,
            null_prob: t.null_prob,
            smoothing: SmoothingKind::Variational,
            alpha,
            favor_diagonal: t.favor_diagonal,
            max_sentence_len: t.max_sentence_len,
            dictionary: None,
        }
    }
}

impl AlignerSection {
    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            iterations: self.iterations,
            initial_tension: self.initial_tension,
            optimize_tension: self.optimize_tension,
            null_prob: self.null_prob,
            smoothing: match self.smoothing {
                SmoothingKind::None => Smoothing::None,
                SmoothingKind::Variational => Smoothing::Variational { alpha: self.alpha },
            },
            favor_diagonal: self.favor_diagonal,
            max_sentence_len: self.max_sentence_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub output_dir: PathBuf,
    /// Adaptation variants evaluated after the baseline.
    pub variants: Vec<Variant>,
    pub markdown: bool,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            output_dir: PathBuf::from("lrlkit-out"),
            variants: Variant::ALL.into_iter().filter(|v| *v != Variant::BaselineZero).collect(),
            markdown: false,
        }
    }
}

/// A configuration together with the directory its relative paths hang off.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub source: Option<PathBuf>,
}

impl LoadedConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(LoadedConfig { config: RunConfig::default(), base_dir: PathBuf::from("."), source: None });
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).filter(|p| !p.as_os_str().is_empty());
        Ok(LoadedConfig {
            config,
            base_dir: base_dir.unwrap_or_else(|| PathBuf::from(".")),
            source: Some(path.to_path_buf()),
        })
    }

    /// Resolve a path taken from the config file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn hash(&self) -> String {
        config_hash(&self.config)
    }

    pub fn labels(&self) -> CliResult<TaskLabelSet> {
        match &self.config.data.labels {
            Some(labels) => Ok(TaskLabelSet::new(labels.iter())?),
            None => Ok(TaskLabelSet::sib_topics()),
        }
    }

    pub fn require_language(&self) -> CliResult<(&str, &str)> {
        let l = &self.config.language;
        if l.code.trim().is_empty() {
            return Err(self.missing("language.code"));
        }
        let name = if l.name.trim().is_empty() { l.code.as_str() } else { l.name.as_str() };
        Ok((l.code.as_str(), name))
    }

    pub fn data_path(&self) -> CliResult<PathBuf> {
        self.config.data.path.as_deref().map(|p| self.resolve(p)).ok_or_else(|| self.missing("data.path"))
    }

    pub fn missing(&self, key: &str) -> CliError {
        CliError::Config {
            path: self.source.clone().unwrap_or_else(|| PathBuf::from("<defaults>")),
            message: format!("{key} is required (set it in the config file or with a flag)"),
        }
    }
}

/// SHA-256 over the canonical JSON form, without the API key and output
/// directory.
pub fn config_hash(config: &RunConfig) -> String {
    let mut value = serde_json::to_value(config).expect("config serializes");
    if let Some(p) = value.get_mut("pipeline").and_then(|v| v.as_object_mut()) {
        p.remove("output_dir");
    }
    if let Some(b) = value.get_mut("backend").and_then(|v| v.as_object_mut()) {
        b.remove("api_key");
    }
    lrlkit::sha256_hex(canonical_json(&value).as_bytes())
}

/// JSON with object keys sorted at every level.
pub fn canonical_json(value: &serde_json::Value) -> String {
    use serde_json::Value;
    fn sort(v: &Value) -> Value {
        match v {
            Value::Object(m) => {
                let mut keys: Vec<&String> = m.keys().collect();
                keys.sort();
                let mut out = serde_json::Map::new();
                for k in keys {
                    out.insert(k.clone(), sort(&m[k]));
                }
                Value::Object(out)
            }
            Value::Array(a) => Value::Array(a.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    serde_json::to_string(&sort(value)).expect("json serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_secrets_and_output_dir() {
        let mut a = RunConfig::default();
        let h = config_hash(&a);
        a.backend.api_key = Some("secret".into());
        a.pipeline.output_dir = PathBuf::from("elsewhere");
        assert_eq!(config_hash(&a), h);
        a.eval.seed = 1;
        assert_ne!(config_hash(&a), h);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[eval]\nseeds = 3\n").is_err());
        let c: RunConfig = toml::from_str("[eval]\nvariant = \"fewshot_plain\"\nk = 3\n").unwrap();
        assert_eq!(c.eval.k_for(Variant::FewshotPlain), 3);
        assert_eq!(c.eval.k_for(Variant::WordAlignment), 0);
    }
}
