//! Diagnostics and in-context-learning adaptation for low-resource languages.
//!
//! * [`corpus`]: labelled, multiple-choice and parallel data.
//! * [`tokmetrics`]: token-to-byte ratio, tokenizer parity, information parity.
//! * [`aligner`]: IBM Model 2 word alignment and dictionary induction.
//! * [`retriever`]: BM25 and seeded random demonstration selection.
//! * [`promptkit`]: byte-exact prompt rendering for every variant.
//! * [`harness`]: backends and evaluation runs.
//! * [`stats`]: paired significance, point-biserial correlation.
//! * [`recommender`]: strategy ranking from a language profile.

pub mod aligner;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod promptkit;
pub mod recommender;
pub mod retriever;
pub mod stats;
pub mod tokmetrics;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
