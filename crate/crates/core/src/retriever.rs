//! Okapi BM25 over whitespace tokens, plus seeded random sampling.
//!
//! ```text
//! idf(t)      = ln(1 + (N - n_t + 0.5) / (n_t + 0.5))
//! score(d, q) = Σ_{t ∈ q} idf(t) · tf(t,d)·(k1+1) / (tf(t,d) + k1·(1 - b + b·|d|/avgdl))
//! ```
//!
//! Query tokens are not deduplicated: a token repeated in the query
//! contributes once per occurrence. Text is indexed exactly as given.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::corpus::whitespace_tokens;
use crate::error::{Error, Result};

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RetrievalMode {
    #[default]
    Bm25,
    Random,
}

impl std::str::FromStr for RetrievalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bm25" => Ok(RetrievalMode::Bm25),
            "random" => Ok(RetrievalMode::Random),
            other => Err(Error::InvalidArgument(format!("unknown retrieval mode {other:?}; use bm25 or random"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Index {
    k1: f64,
    b: f64,
    doc_freq: HashMap<String, usize>,
    term_freqs: Vec<HashMap<String, usize>>,
    doc_lens: Vec<usize>,
    avgdl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: usize,
    pub score: f64,
}

pub fn build_index<S: AsRef<str>>(pool: &[S], k1: f64, b: f64) -> Result<Bm25Index> {
    Bm25Index::new(pool, k1, b)
}

impl Bm25Index {
    pub fn new<S: AsRef<str>>(pool: &[S], k1: f64, b: f64) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::EmptyInput("BM25 pool"));
        }
        if !(k1 >= 0.0) || !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!("BM25 needs k1 >= 0 and 0 <= b <= 1 (got k1={k1}, b={b})")));
        }
        let mut doc_freq = HashMap::new();
        let mut term_freqs = Vec::with_capacity(pool.len());
        let mut doc_lens = Vec::with_capacity(pool.len());
        for doc in pool {
            let tokens = whitespace_tokens(doc.as_ref());
            let mut tf: HashMap<String, usize> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.to_string()).or_insert(0) += 1;
            }
            for t in tf.keys() {
                *doc_freq.entry(t.clone()).or_insert(0) += 1;
            }
            doc_lens.push(tokens.len());
            term_freqs.push(tf);
        }
        let total: usize = doc_lens.iter().sum();
        if total == 0 {
            return Err(Error::EmptyInput("BM25 pool (every document is blank)"));
        }
        let avgdl = total as f64 / pool.len() as f64;
        Ok(Bm25Index { k1, b, doc_freq, term_freqs, doc_lens, avgdl })
    }

    pub fn len(&self) -> usize {
        self.doc_lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_lens.is_empty()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn doc_len(&self, doc_id: usize) -> usize {
        self.doc_lens[doc_id]
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn term_freq(&self, doc_id: usize, term: &str) -> usize {
        self.term_freqs[doc_id].get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_freq(term) as f64;
        let big_n = self.len() as f64;
        (1.0 + (big_n - n + 0.5) / (n + 0.5)).ln()
    }

    /// Score of one document against a query.
    pub fn score(&self, doc_id: usize, query: &str) -> f64 {
        let norm = self.k1 * (1.0 - self.b + self.b * self.doc_lens[doc_id] as f64 / self.avgdl);
        whitespace_tokens(query)
            .into_iter()
            .map(|t| {
                let tf = self.term_freq(doc_id, t) as f64;
                if tf == 0.0 {
                    0.0
                } else {
                    self.idf(t) * tf * (self.k1 + 1.0) / (tf + norm)
                }
            })
            .sum()
    }

    /// Top `top_k` documents by descending score, ties by ascending id.
    pub fn query(&self, text: &str, top_k: usize) -> Result<Vec<ScoredDoc>> {
        if top_k == 0 {
            return Err(Error::InvalidArgument("top_k must be at least 1".into()));
        }
        let mut scored: Vec<ScoredDoc> = (0..self.len())
            .map(|doc_id| ScoredDoc { doc_id, score: self.score(doc_id, text) })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id)));
        scored.truncate(top_k);
        Ok(scored)
    }
}

/// Uniform integer in `[0, bound)` by rejection sampling on 64-bit draws.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// `k` distinct ids from `0..pool_len`, in draw order.
///
/// The generator is ChaCha8 seeded with `seed_from_u64(seed)`; ids come from
/// the first `k` steps of a forward Fisher–Yates shuffle in which step `i`
/// swaps position `i` with `i + (next_u64 mod (pool_len - i))`, resampling
/// any draw at or above the largest multiple of `pool_len - i`.
pub fn sample_random(pool_len: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if k > pool_len {
        return Err(Error::InvalidArgument(format!("cannot sample {k} of {pool_len} documents")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = (0..pool_len).collect();
    for i in 0..k {
        let j = i + bounded(&mut rng, (pool_len - i) as u64) as usize;
        ids.swap(i, j);
    }
    ids.truncate(k);
    Ok(ids)
}

/// Per-query seed so that random demonstrations differ across test examples
/// but stay reproducible from the run seed.
pub fn derive_seed(seed: u64, key: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Bm25Index {
        build_index(&["a b a", "b c", "c c c d"], DEFAULT_K1, DEFAULT_B).unwrap()
    }

    #[test]
    fn statistics_match_hand_counts() {
        let ix = toy();
        assert_eq!(ix.len(), 3);
        assert_eq!(ix.doc_freq("a"), 1);
        assert_eq!(ix.doc_freq("b"), 2);
        assert_eq!(ix.doc_freq("c"), 2);
        assert_eq!(ix.doc_freq("d"), 1);
        assert_eq!(ix.term_freq(0, "a"), 2);
        assert_eq!(ix.term_freq(2, "c"), 3);
        assert!((ix.avgdl() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_document_avgdl() {
        let ix = build_index(&["x y z w"], 1.2, 0.75).unwrap();
        assert_eq!(ix.avgdl(), 4.0);
    }

    #[test]
    fn no_overlap_returns_zero_ties_in_id_order() {
        let ix = toy();
        let r = ix.query("zz", 10).unwrap();
        assert_eq!(r.iter().map(|d| d.doc_id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(r.iter().all(|d| d.score == 0.0));
    }

    #[test]
    fn hand_computed_score() {
        let ix = toy();
        // doc 0, query "a": n=1, N=3, tf=2, |d|=3, avgdl=3.
        let idf = (1.0f64 + 2.5 / 1.5).ln();
        let expected = idf * 2.0 * 2.2 / (2.0 + 1.2);
        assert!((ix.score(0, "a") - expected).abs() < 1e-12);
        assert!((ix.score(0, "a a") - 2.0 * expected).abs() < 1e-12);
    }

    #[test]
    fn sampling_rules() {
        assert_eq!(sample_random(10, 3, 7).unwrap(), sample_random(10, 3, 7).unwrap());
        let mut all = sample_random(6, 6, 1).unwrap();
        all.sort();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        assert!(sample_random(3, 4, 1).is_err());
        assert!(sample_random(3, 0, 1).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_index::<&str>(&[], 1.2, 0.75).is_err());
        assert!(build_index(&["a"], -1.0, 0.75).is_err());
        assert!(build_index(&["a"], 1.2, 1.5).is_err());
        assert!(toy().query("a", 0).is_err());
    }
}
