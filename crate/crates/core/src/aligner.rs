//! IBM Model 2 word alignment with a diagonal distortion prior, trained by EM.
//!
//! English words are conditioned on target-language words: every English
//! position `j` of a pair aligns to one target-language position `i` or to
//! the null word, with
//!
//! ```text
//! p(a_j = 0)     = p0
//! p(a_j = i > 0) = (1 - p0) * exp(λ h(i, j)) / Z_j,   h(i, j) = -| i/n - j/m |
//! ```
//!
//! where `n` is the target-language length, `m` the English length and both
//! positions are 1-based inside `h`. Translation probabilities `t(e | f)` are
//! re-estimated after every E-step; the tension `λ` is re-optimized on the
//! expected complete-data log-likelihood from the second iteration on.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::corpus::{whitespace_tokens, ParallelCorpus};
use crate::error::{Error, Result};

pub const NULL_WORD: &str = "<null>";
const NULL_ID: u32 = 0;
const CHUNK: usize = 64;
const TENSION_MIN: f64 = 0.1;
const TENSION_MAX: f64 = 14.0;
const TENSION_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smoothing {
    /// Plain maximum-likelihood normalization.
    None,
    /// Mean-field update under a symmetric Dirichlet(α) prior:
    /// `t(e|f) ∝ exp(ψ(c(e,f) + α))`, renormalized per row.
    Variational { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TargetToEnglish,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub iterations: usize,
    pub initial_tension: f64,
    pub optimize_tension: bool,
    pub null_prob: f64,
    pub smoothing: Smoothing,
    /// Off means a uniform distortion over the null word and every position.
    pub favor_diagonal: bool,
    pub max_sentence_len: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            iterations: 5,
            initial_tension: 4.0,
            optimize_tension: true,
            null_prob: 0.08,
            smoothing: Smoothing::Variational { alpha: 0.01 },
            favor_diagonal: true,
            max_sentence_len: 200,
        }
    }
}

impl TrainOptions {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("at least one EM iteration is required".into()));
        }
        if !(0.0..1.0).contains(&self.null_prob) {
            return Err(Error::InvalidArgument(format!("null probability {} outside [0, 1)", self.null_prob)));
        }
        if !(self.initial_tension > 0.0) {
            return Err(Error::InvalidArgument(format!("tension {} must be positive", self.initial_tension)));
        }
        if let Smoothing::Variational { alpha } = self.smoothing {
            if !(alpha > 0.0) {
                return Err(Error::InvalidArgument(format!("variational alpha {alpha} must be positive")));
            }
        }
        Ok(())
    }
}

/// `-|i/n - j/m|` with 1-based `i` (target-language) and `j` (English).
pub fn diagonal_feature(i: usize, j: usize, m: usize, n: usize) -> f64 {
    -((i as f64 / n as f64) - (j as f64 / m as f64)).abs()
}

/// Prior over the `n + 1` alignment choices (null first) of English position
/// `j` (0-based) in a pair with `m` English and `n` target-language words.
pub fn distortion(j: usize, m: usize, n: usize, tension: f64, null_prob: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(null_prob);
    let weights: Vec<f64> = (1..=n)
        .map(|i| (tension * diagonal_feature(i, j + 1, m, n)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    out.extend(weights.iter().map(|w| (1.0 - null_prob) * w / z));
    out
}

fn uniform_distortion(n: usize) -> Vec<f64> {
    vec![1.0 / (n + 1) as f64; n + 1]
}

/// Trained alignment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentModel {
    source_vocab: Vec<String>,
    source_index: HashMap<String, u32>,
    english_vocab: Vec<String>,
    english_index: HashMap<String, u32>,
    /// Row per source id (null at 0): English id → t(e | f).
    t: Vec<HashMap<u32, f64>>,
    /// Set until the first M-step: every t(e|f) equals this value.
    uniform_t: Option<f64>,
    pub tension: f64,
    pub null_prob: f64,
    pub smoothing: Smoothing,
    pub favor_diagonal: bool,
    pub direction: Direction,
    max_sentence_len: usize,
    /// Corpus log-likelihood before each EM update, plus once after the last.
    pub log_likelihood_trace: Vec<f64>,
}

/// Alignment links of one sentence pair, `(target_index, english_index)`,
/// 0-based, null links omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceAlignment {
    pub links: Vec<(usize, usize)>,
}

impl SentenceAlignment {
    /// Space-separated `i-j` pairs sorted by English index.
    pub fn pharaoh(&self) -> String {
        pharaoh_format(self)
    }
}

pub fn pharaoh_format(alignment: &SentenceAlignment) -> String {
    let mut links = alignment.links.clone();
    links.sort_by_key(|&(i, j)| (j, i));
    links
        .iter()
        .map(|(i, j)| format!("{i}-{j}"))
        .collect::<Vec<_>>()
        .join(" ")
}

struct Encoded {
    pairs: Vec<(Vec<u32>, Vec<u32>)>,
}

#[derive(Default)]
struct EStats {
    counts: HashMap<(u32, u32), f64>,
    log_likelihood: f64,
    emp_feat: f64,
    /// Non-null posterior mass per (m, n, j).
    position_mass: BTreeMap<(usize, usize, usize), f64>,
}

impl EStats {
    fn absorb(&mut self, other: EStats) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0.0) += v;
        }
        self.log_likelihood += other.log_likelihood;
        self.emp_feat += other.emp_feat;
        for (k, v) in other.position_mass {
            *self.position_mass.entry(k).or_insert(0.0) += v;
        }
    }
}

fn tokenize_pair<'a>(target: &'a str, english: &'a str, pair: usize, max_len: usize) -> Result<(Vec<&'a str>, Vec<&'a str>)> {
    let f = whitespace_tokens(target);
    let e = whitespace_tokens(english);
    if f.is_empty() || e.is_empty() {
        return Err(Error::AlignmentInput {
            pair,
            message: "a side has no tokens after whitespace splitting".into(),
        });
    }
    if f.len() > max_len || e.len() > max_len {
        return Err(Error::AlignmentInput {
            pair,
            message: format!(
                "sentence of {} tokens exceeds the {max_len}-token limit",
                f.len().max(e.len())
            ),
        });
    }
    Ok((f, e))
}

/// Train with EM for `opts.iterations` iterations.
pub fn train(corpus: &ParallelCorpus, opts: &TrainOptions) -> Result<AlignmentModel> {
    opts.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput("training an aligner on an empty corpus"));
    }
    let mut source_vocab = vec![NULL_WORD.to_string()];
    let mut source_index = HashMap::new();
    let mut english_vocab = Vec::new();
    let mut english_index = HashMap::new();
    let mut pairs = Vec::with_capacity(corpus.len());
    for (p, pair) in corpus.pairs().iter().enumerate() {
        let (f, e) = tokenize_pair(&pair.target, &pair.english, p, opts.max_sentence_len)?;
        let f_ids = f
            .iter()
            .map(|w| {
                *source_index.entry(w.to_string()).or_insert_with(|| {
                    source_vocab.push(w.to_string());
                    (source_vocab.len() - 1) as u32
                })
            })
            .collect();
        let e_ids = e
            .iter()
            .map(|w| {
                *english_index.entry(w.to_string()).or_insert_with(|| {
                    english_vocab.push(w.to_string());
                    (english_vocab.len() - 1) as u32
                })
            })
            .collect();
        pairs.push((f_ids, e_ids));
    }
    let encoded = Encoded { pairs };

    let mut model = AlignmentModel {
        t: vec![HashMap::new(); source_vocab.len()],
        uniform_t: Some(1.0 / english_vocab.len() as f64),
        source_vocab,
        source_index,
        english_vocab,
        english_index,
        tension: opts.initial_tension,
        null_prob: opts.null_prob,
        smoothing: opts.smoothing,
        favor_diagonal: opts.favor_diagonal,
        direction: Direction::TargetToEnglish,
        max_sentence_len: opts.max_sentence_len,
        log_likelihood_trace: Vec::with_capacity(opts.iterations + 1),
    };

    for iter in 0..opts.iterations {
        let stats = model.expectation(&encoded, true);
        tracing::debug!(iter, log_likelihood = stats.log_likelihood, tension = model.tension, "EM iteration");
        model.log_likelihood_trace.push(stats.log_likelihood);
        if opts.favor_diagonal && opts.optimize_tension && iter > 0 {
            model.tension = optimize_tension(model.tension, &stats);
        }
        model.maximize(&stats.counts);
    }
    let final_stats = model.expectation(&encoded, false);
    model.log_likelihood_trace.push(final_stats.log_likelihood);
    Ok(model)
}

/// Maximize `λ·E[h] - Σ w log Z(λ)` over `[TENSION_MIN, TENSION_MAX]` by
/// bisection on its derivative; keep `current` unless the candidate scores at
/// least as well.
fn optimize_tension(current: f64, stats: &EStats) -> f64 {
    let objective = |lambda: f64| -> f64 {
        let mut q = lambda * stats.emp_feat;
        for (&(m, n, j), &w) in &stats.position_mass {
            let z: f64 = (1..=n).map(|i| (lambda * diagonal_feature(i, j, m, n)).exp()).sum();
            q -= w * z.ln();
        }
        q
    };
    let gradient = |lambda: f64| -> f64 {
        let mut g = stats.emp_feat;
        for (&(m, n, j), &w) in &stats.position_mass {
            let (mut z, mut zh) = (0.0, 0.0);
            for i in 1..=n {
                let h = diagonal_feature(i, j, m, n);
                let u = (lambda * h).exp();
                z += u;
                zh += u * h;
            }
            g -= w * zh / z;
        }
        g
    };
    let (mut lo, mut hi) = (TENSION_MIN, TENSION_MAX);
    let candidate = if gradient(lo) <= 0.0 {
        lo
    } else if gradient(hi) >= 0.0 {
        hi
    } else {
        for _ in 0..TENSION_STEPS {
            let mid = 0.5 * (lo + hi);
            if gradient(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if objective(candidate) >= objective(current) {
        candidate
    } else {
        current
    }
}

impl AlignmentModel {
    fn t_of(&self, f: Option<u32>, e: Option<u32>) -> f64 {
        if let Some(u) = self.uniform_t {
            return u;
        }
        match (f, e) {
            // Unknown target-language word: uniform over the English vocabulary.
            (None, _) => 1.0 / self.english_vocab.len().max(1) as f64,
            (Some(_), None) => 0.0,
            (Some(f), Some(e)) => self.t[f as usize].get(&e).copied().unwrap_or(0.0),
        }
    }

    fn prior(&self, j: usize, m: usize, n: usize) -> Vec<f64> {
        if self.favor_diagonal {
            distortion(j, m, n, self.tension, self.null_prob)
        } else {
            uniform_distortion(n)
        }
    }

    /// Unnormalized joint scores for each choice (null first) of every
    /// English position.
    fn joint(&self, f: &[Option<u32>], e: &[Option<u32>]) -> Vec<Vec<f64>> {
        let (m, n) = (e.len(), f.len());
        (0..m)
            .map(|j| {
                let prior = self.prior(j, m, n);
                let mut row = Vec::with_capacity(n + 1);
                row.push(self.t_of(Some(NULL_ID), e[j]) * prior[0]);
                for i in 0..n {
                    row.push(self.t_of(f[i], e[j]) * prior[i + 1]);
                }
                row
            })
            .collect()
    }

    fn expectation(&self, corpus: &Encoded, collect: bool) -> EStats {
        let chunks: Vec<EStats> = corpus
            .pairs
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut s = EStats::default();
                for (f, e) in chunk {
                    let fo: Vec<Option<u32>> = f.iter().map(|&x| Some(x)).collect();
                    let eo: Vec<Option<u32>> = e.iter().map(|&x| Some(x)).collect();
                    let (m, n) = (e.len(), f.len());
                    for (j, row) in self.joint(&fo, &eo).into_iter().enumerate() {
                        let sum: f64 = row.iter().sum();
                        if !(sum > 0.0) {
                            continue;
                        }
                        s.log_likelihood += sum.ln();
                        if !collect {
                            continue;
                        }
                        let null_post = row[0] / sum;
                        *s.counts.entry((NULL_ID, e[j])).or_insert(0.0) += null_post;
                        for i in 0..n {
                            let post = row[i + 1] / sum;
                            *s.counts.entry((f[i], e[j])).or_insert(0.0) += post;
                            s.emp_feat += post * diagonal_feature(i + 1, j + 1, m, n);
                        }
                        *s.position_mass.entry((m, n, j + 1)).or_insert(0.0) += 1.0 - null_post;
                    }
                }
                s
            })
            .collect();
        let mut total = EStats::default();
        for c in chunks {
            total.absorb(c);
        }
        total
    }

    fn maximize(&mut self, counts: &HashMap<(u32, u32), f64>) {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.source_vocab.len()];
        for (&(f, e), &c) in counts {
            rows[f as usize].push((e, c));
        }
        for (f, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(e, _)| e);
            let weights: Vec<(u32, f64)> = match self.smoothing {
                Smoothing::None => row,
                Smoothing::Variational { alpha } => row
                    .into_iter()
                    .map(|(e, c)| (e, digamma(c + alpha).exp()))
                    .collect(),
            };
            let z: f64 = weights.iter().map(|(_, w)| w).sum();
            self.t[f] = if z > 0.0 {
                weights.into_iter().map(|(e, w)| (e, w / z)).collect()
            } else {
                HashMap::new()
            };
        }
        self.uniform_t = None;
    }

    fn encode_pair(&self, target: &str, english: &str) -> Result<(Vec<Option<u32>>, Vec<Option<u32>>)> {
        let (f, e) = tokenize_pair(target, english, 0, self.max_sentence_len)?;
        Ok((
            f.iter().map(|w| self.source_index.get(*w).copied()).collect(),
            e.iter().map(|w| self.english_index.get(*w).copied()).collect(),
        ))
    }

    /// Posterior alignment probabilities: one row per English position, one
    /// column per choice with the null word first.
    pub fn posteriors(&self, target: &str, english: &str) -> Result<Vec<Vec<f64>>> {
        let (f, e) = self.encode_pair(target, english)?;
        Ok(self
            .joint(&f, &e)
            .into_iter()
            .map(|row| {
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    row.iter().map(|x| x / sum).collect()
                } else {
                    let mut r = vec![0.0; row.len()];
                    r[0] = 1.0;
                    r
                }
            })
            .collect())
    }

    /// Most probable alignment of each English word.
    pub fn viterbi_align(&self, target: &str, english: &str) -> Result<SentenceAlignment> {
        let (f, e) = self.encode_pair(target, english)?;
        let mut links = Vec::new();
        for (j, row) in self.joint(&f, &e).into_iter().enumerate() {
            let mut best = 0;
            let mut best_p = 0.0;
            for (i, &p) in row.iter().enumerate() {
                if p > best_p {
                    best = i;
                    best_p = p;
                }
            }
            if best > 0 {
                links.push((best - 1, j));
            }
        }
        Ok(SentenceAlignment { links })
    }

    /// `t(english | target)`, zero when either word is unknown.
    pub fn translation_prob(&self, target_word: &str, english_word: &str) -> f64 {
        match (self.source_index.get(target_word), self.english_index.get(english_word)) {
            (Some(&f), Some(&e)) => self.t_of(Some(f), Some(e)),
            _ => 0.0,
        }
    }

    /// Target-language vocabulary, excluding the null word.
    pub fn source_words(&self) -> &[String] {
        &self.source_vocab[1..]
    }

    pub fn english_words(&self) -> &[String] {
        &self.english_vocab
    }

    /// `t(· | target_word)` sorted by English word.
    pub fn row(&self, target_word: &str) -> Vec<(&str, f64)> {
        let Some(&f) = self.source_index.get(target_word) else {
            return Vec::new();
        };
        let mut out: Vec<(&str, f64)> = if let Some(u) = self.uniform_t {
            self.english_vocab.iter().map(|e| (e.as_str(), u)).collect()
        } else {
            self.t[f as usize]
                .iter()
                .map(|(&e, &p)| (self.english_vocab[e as usize].as_str(), p))
                .collect()
        };
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }

    /// Sorted nested map of the translation table, null row included.
    pub fn t_table(&self) -> BTreeMap<String, BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for (f, word) in self.source_vocab.iter().enumerate() {
            let row: BTreeMap<String, f64> = if let Some(u) = self.uniform_t {
                self.english_vocab.iter().map(|e| (e.clone(), u)).collect()
            } else {
                self.t[f]
                    .iter()
                    .map(|(&e, &p)| (self.english_vocab[e as usize].clone(), p))
                    .collect()
            };
            out.insert(word.clone(), row);
        }
        out
    }

    /// Canonical JSON of the parameters; equal models serialize identically.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            direction: Direction,
            tension: f64,
            null_prob: f64,
            smoothing: Smoothing,
            favor_diagonal: bool,
            log_likelihood_trace: &'a [f64],
            t_table: BTreeMap<String, BTreeMap<String, f64>>,
        }
        serde_json::to_string_pretty(&View {
            direction: self.direction,
            tension: self.tension,
            null_prob: self.null_prob,
            smoothing: self.smoothing,
            favor_diagonal: self.favor_diagonal,
            log_likelihood_trace: &self.log_likelihood_trace,
            t_table: self.t_table(),
        })
        .expect("model serializes")
    }
}

/// Free-function form of [`AlignmentModel::viterbi_align`].
pub fn viterbi_align(model: &AlignmentModel, target: &str, english: &str) -> Result<SentenceAlignment> {
    model.viterbi_align(target, english)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub english: String,
    pub prob: f64,
}

/// Single-best English gloss per target-language word.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    entries: BTreeMap<String, DictionaryEntry>,
    /// Fraction of the corpus vocabulary that has an entry.
    pub coverage: f64,
}

impl Dictionary {
    pub fn from_entries<I, W, E>(entries: I) -> Self
    where
        I: IntoIterator<Item = (W, E, f64)>,
        W: Into<String>,
        E: Into<String>,
    {
        let entries: BTreeMap<String, DictionaryEntry> = entries
            .into_iter()
            .map(|(w, e, p)| (w.into(), DictionaryEntry { english: e.into(), prob: p }))
            .collect();
        Dictionary {
            coverage: if entries.is_empty() { 0.0 } else { 1.0 },
            entries,
        }
    }

    pub fn get(&self, word: &str) -> Option<&DictionaryEntry> {
        self.entries.get(word)
    }

    pub fn translate(&self, word: &str) -> Option<&str> {
        self.entries.get(word).map(|e| e.english.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DictionaryEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// `target<TAB>english<TAB>probability`, one entry per line, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, e) in &self.entries {
            out.push_str(&format!("{w}\t{}\t{}\n", e.english, e.prob));
        }
        out
    }

    /// Parse the TSV form; the probability column is optional and defaults
    /// to 1. Lines starting with `#` are comments.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |msg: &str| Error::InvalidArgument(format!("dictionary line {}: {msg}", idx + 1));
            if cols.len() < 2 || cols[0].is_empty() || cols[1].is_empty() {
                return Err(bad("expected target<TAB>english[<TAB>prob]"));
            }
            let prob = match cols.get(2) {
                Some(p) => p.trim().parse::<f64>().map_err(|_| bad("probability is not a number"))?,
                None => 1.0,
            };
            if !(prob > 0.0 && prob <= 1.0) {
                return Err(bad("probability outside (0, 1]"));
            }
            entries.push((cols[0].to_string(), cols[1].to_string(), prob));
        }
        Ok(Dictionary::from_entries(entries))
    }
}

/// Build a dictionary from the t-table argmax of every corpus word that
/// receives at least one Viterbi link; ties go to the lexicographically
/// smallest English word.
pub fn extract_dictionary(model: &AlignmentModel, corpus: &ParallelCorpus) -> Result<Dictionary> {
    if model.source_words().is_empty() || model.english_words().is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut vocab = BTreeMap::<String, bool>::new();
    for pair in corpus.pairs() {
        let f = whitespace_tokens(&pair.target);
        for w in &f {
            vocab.entry(w.to_string()).or_insert(false);
        }
        for (i, _) in model.viterbi_align(&pair.target, &pair.english)?.links {
            if let Some(linked) = vocab.get_mut(f[i]) {
                *linked = true;
            }
        }
    }
    if vocab.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut entries = BTreeMap::new();
    for (word, linked) in &vocab {
        if !linked {
            continue;
        }
        let best = model
            .row(word)
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .fold(None::<(&str, f64)>, |acc, (e, p)| match acc {
                Some((_, bp)) if bp >= p => acc,
                _ => Some((e, p)),
            });
        if let Some((english, prob)) = best {
            entries.insert(
                word.clone(),
                DictionaryEntry {
                    english: english.to_string(),
                    prob: prob.min(1.0),
                },
            );
        }
    }
    let coverage = entries.len() as f64 / vocab.len() as f64;
    Ok(Dictionary { entries, coverage })
}

/// Distinct target-language words of a corpus.
pub fn corpus_vocabulary(corpus: &ParallelCorpus) -> HashSet<String> {
    corpus
        .pairs()
        .iter()
        .flat_map(|p| whitespace_tokens(&p.target))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentencePair;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::new(
            "xxx",
            pairs
                .iter()
                .map(|(t, e)| SentencePair { target: t.to_string(), english: e.to_string() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn trivial_corpus_learns_certain_translation() {
        let c = corpus(&[("ka", "dog"); 4]);
        let opts = TrainOptions { null_prob: 0.0, ..Default::default() };
        let m = train(&c, &opts).unwrap();
        assert!((m.translation_prob("ka", "dog") - 1.0).abs() < 1e-12);
        assert_eq!(m.viterbi_align("ka", "dog").unwrap().links, vec![(0, 0)]);
        let d = extract_dictionary(&m, &c).unwrap();
        let e = d.get("ka").unwrap();
        assert_eq!(e.english, "dog");
        assert!((e.prob - 1.0).abs() < 1e-12);
        assert_eq!(d.coverage, 1.0);
    }

    #[test]
    fn pharaoh_examples() {
        let a = SentenceAlignment { links: vec![(1, 2), (0, 0)] };
        assert_eq!(pharaoh_format(&a), "0-0 1-2");
        assert_eq!(pharaoh_format(&SentenceAlignment::default()), "");
    }

    #[test]
    fn rows_normalize_after_every_m_step() {
        let c = corpus(&[("a b c", "x y z"), ("a c", "x z"), ("b", "y"), ("c a", "z x w")]);
        for smoothing in [Smoothing::None, Smoothing::Variational { alpha: 0.01 }] {
            for iterations in 1..=4 {
                let m = train(&c, &TrainOptions { iterations, smoothing, ..Default::default() }).unwrap();
                for (f, row) in m.t_table() {
                    let s: f64 = row.values().sum();
                    assert!((s - 1.0).abs() < 1e-9, "row {f} sums to {s}");
                }
            }
        }
    }

    #[test]
    fn oov_words_never_crash() {
        let c = corpus(&[("a b", "x y"), ("a", "x")]);
        let m = train(&c, &TrainOptions::default()).unwrap();
        let a = m.viterbi_align("zz qq", "x y").unwrap();
        for (i, j) in a.links {
            assert!(i < 2 && j < 2);
        }
        let a = m.viterbi_align("a", "unseen").unwrap();
        assert!(a.links.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let long = vec!["w"; 201].join(" ");
        let c = corpus(&[("a", "x"), (long.as_str(), "y")]);
        match train(&c, &TrainOptions::default()).unwrap_err() {
            Error::AlignmentInput { pair, .. } => assert_eq!(pair, 1),
            other => panic!("unexpected {other}"),
        }
        let c = corpus(&[("a", "x")]);
        assert!(train(&c, &TrainOptions { iterations: 0, ..Default::default() }).is_err());
        assert!(train(&c, &TrainOptions { null_prob: 1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn distortion_sums_to_one_and_flattens() {
        for (m, n) in [(1, 1), (3, 5), (7, 2)] {
            for j in 0..m {
                let d = distortion(j, m, n, 4.0, 0.08);
                assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let d = distortion(2, 5, 6, 1e-8, 0.08);
        let body = &d[1..];
        let mean = body.iter().sum::<f64>() / body.len() as f64;
        let var = body.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / body.len() as f64;
        assert!(var < 1e-6);
    }

    #[test]
    fn dictionary_tsv_round_trip() {
        let d = Dictionary::from_entries([("ka", "dog", 1.0), ("ro", "runs", 0.5)]);
        let back = Dictionary::from_tsv(&d.to_tsv()).unwrap();
        assert_eq!(back.translate("ro"), Some("runs"));
        assert_eq!(back.get("ro").unwrap().prob, 0.5);
        assert!(Dictionary::from_tsv("ka\n").is_err());
        assert!(Dictionary::from_tsv("ka\tdog\t1.5\n").is_err());
    }
}
