//! The inference-backend contract and an in-process mock.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendErrorKind {
    /// Connection refused, timeouts, 5xx responses. Retried.
    Transport,
    /// The endpoint answered but the response broke the contract. Not retried.
    Protocol,
    /// The backend cannot do what was asked (e.g. no log-probabilities).
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct BackendError {
    pub kind: BackendErrorKind,
    pub request_id: Option<String>,
    pub message: String,
}

impl BackendError {
    pub fn transport(message: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::Transport,
            request_id: None,
            message: message.into(),
        }
    }

    pub fn protocol(message: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::Protocol,
            request_id: None,
            message: message.into(),
        }
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        BackendError {
            kind: BackendErrorKind::Unsupported,
            request_id: None,
            message: message.into(),
        }
    }

    pub fn with_request_id(mut self, id: impl Into<String>) -> Self {
        self.request_id = Some(id.into());
        self
    }

    pub fn is_transport(&self) -> bool {
        self.kind == BackendErrorKind::Transport
    }
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} error", self.kind)?;
        if let Some(id) = &self.request_id {
            write!(f, " (request {id})")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Teacher-forced log-probabilities of a text, one per scored token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextScore {
    pub token_logprobs: Vec<f64>,
}

impl TextScore {
    /// Negative sum of the token log-probabilities, without length
    /// normalization.
    pub fn nll(&self) -> f64 {
        -self.token_logprobs.iter().sum::<f64>()
    }
}

/// Anything that can greedily complete a prompt and score a text.
///
/// Generation is always greedy (temperature 0).
pub trait ScoringBackend: Send + Sync {
    /// Stable description of the backend (kind, model, endpoint) for reports.
    fn identity(&self) -> String;

    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String, BackendError>;

    fn score(&self, text: &str) -> Result<TextScore, BackendError>;
}

impl<B: ScoringBackend + ?Sized> ScoringBackend for &B {
    fn identity(&self) -> String {
        (**self).identity()
    }
    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String, BackendError> {
        (**self).generate(prompt, max_tokens)
    }
    fn score(&self, text: &str) -> Result<TextScore, BackendError> {
        (**self).score(text)
    }
}

impl<B: ScoringBackend + ?Sized> ScoringBackend for Box<B> {
    fn identity(&self) -> String {
        (**self).identity()
    }
    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String, BackendError> {
        (**self).generate(prompt, max_tokens)
    }
    fn score(&self, text: &str) -> Result<TextScore, BackendError> {
        (**self).score(text)
    }
}

/// How the mock answers generation requests.
#[derive(Debug, Clone, PartialEq)]
pub enum MockGeneration {
    /// Find the needle whose last occurrence in the prompt starts latest
    /// (longer needle on ties) and answer with its paired string; answers
    /// `fallback` when no needle occurs.
    Oracle {
        answers: Vec<(String, String)>,
        fallback: String,
    },
    /// Always the same output.
    Constant(String),
    /// Every generation fails with a transport error.
    Unreachable,
}

/// How the mock scores texts.
#[derive(Debug, Clone, PartialEq)]
pub enum MockScoring {
    /// One token per character. ASCII characters cost `ascii` nats, others
    /// cost `other`, each modulated by `1 + (codepoint % 5) / 10` so that
    /// texts of equal length still differ.
    CharCost { ascii: f64, other: f64 },
    /// Fixed total NLL per exact text, spread evenly over its characters.
    Table(HashMap<String, f64>),
    /// Every score request fails with a transport error.
    Unreachable,
}

/// Deterministic in-process backend used by tests and the bundled pipeline.
#[derive(Debug, Clone)]
pub struct MockBackend {
    pub generation: MockGeneration,
    pub scoring: MockScoring,
    /// Multiplies every log-probability the mock emits.
    pub logprob_scale: f64,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend {
            generation: MockGeneration::Constant(String::new()),
            scoring: MockScoring::CharCost {
                ascii: 1.0,
                other: 3.0,
            },
            logprob_scale: 1.0,
        }
    }
}

impl MockBackend {
    pub fn constant(output: impl Into<String>) -> Self {
        MockBackend {
            generation: MockGeneration::Constant(output.into()),
            ..Default::default()
        }
    }

    pub fn oracle<I, A, B>(answers: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        MockBackend {
            generation: MockGeneration::Oracle {
                answers: answers
                    .into_iter()
                    .map(|(a, b)| (a.into(), b.into()))
                    .collect(),
                fallback: "I cannot determine the answer.".into(),
            },
            ..Default::default()
        }
    }

    pub fn with_scoring(mut self, scoring: MockScoring) -> Self {
        self.scoring = scoring;
        self
    }
}

impl ScoringBackend for MockBackend {
    fn identity(&self) -> String {
        let gen = match &self.generation {
            MockGeneration::Oracle { answers, .. } => format!("oracle[{}]", answers.len()),
            MockGeneration::Constant(s) => format!("constant[{s:?}]"),
            MockGeneration::Unreachable => "unreachable".to_string(),
        };
        format!("mock:{gen}")
    }

    fn generate(&self, prompt: &str, _max_tokens: usize) -> Result<String, BackendError> {
        match &self.generation {
            MockGeneration::Constant(s) => Ok(s.clone()),
            MockGeneration::Unreachable => Err(BackendError::transport("mock backend is unreachable")),
            MockGeneration::Oracle { answers, fallback } => {
                let best = answers
                    .iter()
                    .filter_map(|(needle, answer)| {
                        prompt.rfind(needle.as_str()).map(|pos| (pos, needle.len(), answer))
                    })
                    .max_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
                Ok(best.map(|(_, _, a)| a.clone()).unwrap_or_else(|| fallback.clone()))
            }
        }
    }

    fn score(&self, text: &str) -> Result<TextScore, BackendError> {
        let logprobs: Vec<f64> = match &self.scoring {
            MockScoring::Unreachable => {
                return Err(BackendError::transport("mock backend is unreachable").with_request_id("mock-0"))
            }
            MockScoring::CharCost { ascii, other } => text
                .chars()
                .map(|c| {
                    let base = if c.is_ascii() { *ascii } else { *other };
                    -base * (1.0 + f64::from(u32::from(c) % 5) / 10.0)
                })
                .collect(),
            MockScoring::Table(table) => {
                let total = table.get(text).ok_or_else(|| {
                    BackendError::protocol(format!("mock has no score for {text:?}"))
                })?;
                let n = text.chars().count().max(1);
                vec![-total / n as f64; n]
            }
        };
        Ok(TextScore {
            token_logprobs: logprobs.into_iter().map(|lp| lp * self.logprob_scale).collect(),
        })
    }
}
