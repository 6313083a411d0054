//! Backend construction from the run configuration.

use std::collections::BTreeMap;

use lrlkit::aligner::Dictionary;
use lrlkit::corpus::{LabeledExample, LoadedDataset, MultiChoiceExample, Split};
use lrlkit::harness::{choice_letter, Evaluable, MockBackend, OpenAiCompatBackend, ScoringBackend};
use lrlkit::promptkit::PromptSpec;

use crate::config::{BackendKind, LoadedConfig, MockMode};
use crate::error::{CliError, CliResult};

/// Prompt substrings that identify an evaluated input.
pub trait OracleKeys {
    fn oracle_needles(&self, dictionary: Option<&Dictionary>) -> Vec<String>;
}

impl OracleKeys for LabeledExample {
    fn oracle_needles(&self, dictionary: Option<&Dictionary>) -> Vec<String> {
        let mut out = vec![format!("Text: {}.", self.text_target)];
        if let Some(d) = dictionary {
            let gloss: Vec<&str> = self.text_target.split_whitespace().filter_map(|w| d.translate(w)).collect();
            if !gloss.is_empty() {
                out.push(format!("Text: {}.", gloss.join(" ")));
            }
        }
        out
    }
}

impl OracleKeys for MultiChoiceExample {
    fn oracle_needles(&self, _dictionary: Option<&Dictionary>) -> Vec<String> {
        let mut block = format!("Query:\n{}\n###\nChoices:", self.question);
        for (i, c) in self.choices.iter().enumerate() {
            block.push_str(&format!("\n({}) {c}", choice_letter(i).unwrap_or('?')));
        }
        block.push_str("\n###\nAnswer:");
        vec![block]
    }
}

fn oracle_answers<T: Evaluable + OracleKeys>(examples: &[T], dictionary: Option<&Dictionary>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for e in examples {
        let gold = e.gold();
        for n in e.oracle_needles(dictionary) {
            out.push((n, gold.clone()));
        }
    }
    out
}

/// Most frequent gold answer among `examples`; ties go to the earlier label
/// in `universe`.
pub fn majority_answer<T: Evaluable>(examples: &[&T], universe: &[String]) -> Option<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in examples {
        *counts.entry(e.gold()).or_insert(0) += 1;
    }
    let mut best: Option<(&String, usize)> = None;
    for label in universe {
        let c = counts.get(label).copied().unwrap_or(0);
        if c > 0 && best.is_none_or(|(_, b)| c > b) {
            best = Some((label, c));
        }
    }
    best.map(|(l, _)| l.clone())
}

fn majority_of_train<T: Evaluable>(examples: &[T], spec: &PromptSpec) -> Option<String> {
    let train: Vec<&T> = examples.iter().filter(|e| e.split() == Split::Train).collect();
    majority_answer(&train, &T::label_universe(spec))
}

/// Build the configured backend. The mock's oracle and majority modes read
/// their answers from `data`.
pub fn build_backend(
    lc: &LoadedConfig,
    data: Option<&LoadedDataset>,
    dictionary: Option<&Dictionary>,
    spec: &PromptSpec,
) -> CliResult<Box<dyn ScoringBackend>> {
    let b = &lc.config.backend;
    match b.kind {
        BackendKind::Http => {
            let url = b.url.clone().ok_or_else(|| lc.missing("backend.url (or LRLKIT_BACKEND_URL)"))?;
            let model = b.model.clone().ok_or_else(|| lc.missing("backend.model (or LRLKIT_MODEL)"))?;
            Ok(Box::new(
                OpenAiCompatBackend::new(url, model).with_api_key(b.api_key.clone()).with_style(b.api_style),
            ))
        }
        BackendKind::Mock => {
            let mock = match b.mock {
                MockMode::Constant => MockBackend::constant(b.constant_output.clone()),
                MockMode::Oracle => {
                    let answers = match data {
                        Some(LoadedDataset::Classification(d)) => oracle_answers(d.examples(), dictionary),
                        Some(LoadedDataset::Multichoice(d)) => oracle_answers(d.examples(), dictionary),
                        None => Vec::new(),
                    };
                    MockBackend::oracle(answers)
                }
                MockMode::Majority => {
                    let answer = match data {
                        Some(LoadedDataset::Classification(d)) => majority_of_train(d.examples(), spec),
                        Some(LoadedDataset::Multichoice(d)) => majority_of_train(d.examples(), spec),
                        None => None,
                    };
                    let answer = answer.ok_or_else(|| {
                        CliError::Invalid("the majority mock needs a dataset with a labelled train split".into())
                    })?;
                    MockBackend::constant(answer)
                }
            };
            Ok(Box::new(mock))
        }
    }
}
