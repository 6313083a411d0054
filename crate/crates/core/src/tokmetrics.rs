//! Token-to-Byte Ratio, Tokenizer Parity and Information Parity.
//!
//! Information Parity is oriented as `NLL(english) / NLL(target)`: values
//! well below 1 mean the model needs many more nats to encode the target text
//! than its English translation.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};
use crate::harness::backend::ScoringBackend;

/// Orientation tag written next to every IP value.
pub const IP_ORIENTATION: &str = "nll_english/nll_target";

/// Anything that can count the tokens of a text.
pub trait TokenCounter: Sync {
    fn count_tokens(&self, text: &str) -> Result<usize>;
}

/// A tokenizer loaded from a single-file JSON definition.
pub struct TokenizerHandle {
    inner: tokenizers::Tokenizer,
    byte_fallback: bool,
}

impl std::fmt::Debug for TokenizerHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TokenizerHandle")
            .field("vocab_size", &self.vocab_size())
            .field("byte_fallback", &self.byte_fallback)
            .finish()
    }
}

impl TokenizerHandle {
    pub fn from_file(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }

    /// Fetch the definition over HTTP(S).
    pub fn from_url(url: &str) -> Result<Self> {
        let mut resp = ureq::get(url)
            .call()
            .map_err(|e| Error::Tokenizer(format!("fetching {url}: {e}")))?;
        let body = resp
            .body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| Error::Tokenizer(format!("reading {url}: {e}")))?;
        Self::from_json(&body)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(json)?;
        // Byte-level pre-tokenization or a BPE byte-fallback both guarantee
        // that any input can be encoded without an unknown token.
        let byte_fallback = value
            .pointer("/model/byte_fallback")
            .and_then(serde_json::Value::as_bool)
            .unwrap_or(false)
            || json_mentions_type(&value, "ByteLevel");
        let inner = tokenizers::Tokenizer::from_bytes(json.as_bytes())
            .map_err(|e| Error::Tokenizer(e.to_string()))?;
        Ok(TokenizerHandle {
            inner,
            byte_fallback,
        })
    }

    pub fn byte_fallback(&self) -> bool {
        self.byte_fallback
    }

    pub fn vocab_size(&self) -> usize {
        self.inner.get_vocab_size(true)
    }

    /// Encode without adding special tokens.
    pub fn encode(&self, text: &str) -> Result<Vec<u32>> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let enc = self
            .inner
            .encode(text, false)
            .map_err(|e| Error::Tokenizer(e.to_string()))?;
        Ok(enc.get_ids().to_vec())
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        self.inner
            .decode(ids, false)
            .map_err(|e| Error::Tokenizer(e.to_string()))
    }
}

fn json_mentions_type(v: &serde_json::Value, ty: &str) -> bool {
    match v {
        serde_json::Value::Object(map) => {
            map.get("type").and_then(|t| t.as_str()) == Some(ty)
                || map.values().any(|x| json_mentions_type(x, ty))
        }
        serde_json::Value::Array(a) => a.iter().any(|x| json_mentions_type(x, ty)),
        _ => false,
    }
}

impl TokenCounter for TokenizerHandle {
    fn count_tokens(&self, text: &str) -> Result<usize> {
        Ok(self.encode(text)?.len())
    }
}

impl<T: TokenCounter + ?Sized> TokenCounter for &T {
    fn count_tokens(&self, text: &str) -> Result<usize> {
        (**self).count_tokens(text)
    }
}

/// Tokens per UTF-8 byte of `text`.
pub fn token_to_byte_ratio(text: &str, tok: &dyn TokenCounter) -> Result<f64> {
    if text.is_empty() {
        return Err(Error::EmptyInput("token-to-byte ratio of an empty text"));
    }
    let tokens = tok.count_tokens(text)?;
    Ok(tokens as f64 / text.len() as f64)
}

/// English token count over target token count.
pub fn tokenizer_parity(target: &str, english: &str, tok: &dyn TokenCounter) -> Result<f64> {
    if target.is_empty() || english.is_empty() {
        return Err(Error::EmptyInput("tokenizer parity needs both sides"));
    }
    let t = tok.count_tokens(target)?;
    let e = tok.count_tokens(english)?;
    if t == 0 {
        return Err(Error::Metric("target text produced no tokens".into()));
    }
    Ok(e as f64 / t as f64)
}

/// `NLL(english) / NLL(target)` under the same backend.
pub fn information_parity(target: &str, english: &str, backend: &dyn ScoringBackend) -> Result<f64> {
    if target.is_empty() || english.is_empty() {
        return Err(Error::EmptyInput("information parity needs both sides"));
    }
    let nll_en = backend.score(english)?.nll();
    let nll_tgt = backend.score(target)?.nll();
    if !nll_tgt.is_finite() || nll_tgt <= 0.0 {
        return Err(Error::Metric(format!("target NLL is {nll_tgt}; ratio undefined")));
    }
    if !nll_en.is_finite() || nll_en <= 0.0 {
        return Err(Error::Metric(format!("English NLL is {nll_en}; ratio undefined")));
    }
    Ok(nll_en / nll_tgt)
}

/// Per-language diagnostic record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub language: String,
    pub ip: f64,
    pub tbr: f64,
    pub tp: f64,
    #[serde(default)]
    pub baseline_accuracy: Option<f64>,
    /// Pairs that contributed to the means.
    pub n: usize,
    #[serde(default)]
    pub skipped: usize,
    #[serde(default = "default_orientation")]
    pub ip_orientation: String,
}

fn default_orientation() -> String {
    IP_ORIENTATION.to_string()
}

/// Metrics of a single parallel pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMetrics {
    pub ip: f64,
    pub tbr: f64,
    pub tp: f64,
}

pub fn pair_metrics(
    target: &str,
    english: &str,
    tok: &dyn TokenCounter,
    backend: &dyn ScoringBackend,
) -> Result<PairMetrics> {
    Ok(PairMetrics {
        tbr: token_to_byte_ratio(target, tok)?,
        tp: tokenizer_parity(target, english, tok)?,
        ip: information_parity(target, english, backend)?,
    })
}

/// Average IP, TBR and TP over every pair of `corpus`. Pairs whose metrics
/// fail are skipped and counted.
pub fn profile_language(
    corpus: &ParallelCorpus,
    tok: &dyn TokenCounter,
    backend: &dyn ScoringBackend,
) -> Result<LanguageProfile> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("profiling an empty corpus"));
    }
    let results: Vec<Result<PairMetrics>> = corpus
        .pairs()
        .par_iter()
        .map(|p| pair_metrics(&p.target, &p.english, tok, backend))
        .collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(m) => ok.push(m),
            Err(e) => {
                tracing::warn!(pair = i, error = %e, "pair skipped while profiling");
                skipped += 1;
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::AllPairsFailed(skipped));
    }
    let n = ok.len() as f64;
    let mean = |f: fn(&PairMetrics) -> f64| pairwise_sum(&ok.iter().map(f).collect::<Vec<_>>()) / n;
    Ok(LanguageProfile {
        language: corpus.language_code.clone(),
        ip: mean(|m| m.ip),
        tbr: mean(|m| m.tbr),
        tp: mean(|m| m.tp),
        baseline_accuracy: None,
        n: ok.len(),
        skipped,
        ip_orientation: IP_ORIENTATION.to_string(),
    })
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
