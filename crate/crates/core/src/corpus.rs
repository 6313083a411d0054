//! Labeled datasets and parallel corpora.
//!
//! Classification rows use the JSON-lines schema
//! `{"id", "text", "text_en", "label", "split"}`; multiple-choice rows use
//! `{"id", "passage", "passage_en", "question", "choices", "answer", "split"}`
//! where `answer` is a 0-based index into the four `choices`. TSV files carry
//! the same columns under a header row (`choice_a`..`choice_d` instead of the
//! `choices` array).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase and trim, the storage form of every label.
pub fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

/// Whitespace tokenization shared by the aligner, the retriever and the
/// word-level prompt variants.
pub fn whitespace_tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "validation" | "valid" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Multichoice,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classification" => Ok(Task::Classification),
            "multichoice" | "multiple_choice" => Ok(Task::Multichoice),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Tsv,
}

impl Format {
    /// Guess from the file extension; anything but `.tsv` is JSON-lines.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => Format::Tsv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "tsv" => Ok(Format::Tsv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Ordered, normalized set of task labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TaskLabelSet {
    labels: Vec<String>,
}

/// The seven SIB-200 topic classes, in the order the classification prompt
/// enumerates them.
pub const SIB_TOPICS: [&str; 7] = [
    "science/technology",
    "travel",
    "politics",
    "sports",
    "health",
    "entertainment",
    "geography",
];

impl TaskLabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for raw in labels {
            let label = normalize_label(raw.as_ref());
            if label.is_empty() {
                return Err(Error::LabelSet("empty label".into()));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::LabelSet(format!("duplicate label {label:?}")));
            }
            out.push(label);
        }
        if out.is_empty() {
            return Err(Error::LabelSet("no labels".into()));
        }
        Ok(TaskLabelSet { labels: out })
    }

    pub fn sib_topics() -> Self {
        TaskLabelSet {
            labels: SIB_TOPICS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Returns the stored form of `raw` if it names a label of this set.
    pub fn resolve(&self, raw: &str) -> Option<&str> {
        let norm = normalize_label(raw);
        self.labels
            .iter()
            .find(|l| **l == norm)
            .map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        let norm = normalize_label(label);
        self.labels.iter().position(|l| *l == norm)
    }
}

impl Default for TaskLabelSet {
    fn default() -> Self {
        Self::sib_topics()
    }
}

impl TryFrom<Vec<String>> for TaskLabelSet {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        TaskLabelSet::new(v)
    }
}

impl From<TaskLabelSet> for Vec<String> {
    fn from(s: TaskLabelSet) -> Self {
        s.labels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    #[serde(rename = "text")]
    pub text_target: String,
    #[serde(rename = "text_en", default)]
    pub text_english: Option<String>,
    pub label: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiChoiceExample {
    pub id: String,
    #[serde(rename = "passage")]
    pub passage_target: String,
    #[serde(rename = "passage_en", default)]
    pub passage_english: Option<String>,
    pub question: String,
    pub choices: [String; 4],
    #[serde(rename = "answer")]
    pub answer_index: usize,
    pub split: Split,
}

/// Common view over both example kinds.
pub trait Example {
    fn id(&self) -> &str;
    fn split(&self) -> Split;
    /// The target-language text a retriever indexes and a prompt embeds.
    fn target_text(&self) -> &str;
    fn english_text(&self) -> Option<&str>;
}

impl Example for LabeledExample {
    fn id(&self) -> &str {
        &self.id
    }
    fn split(&self) -> Split {
        self.split
    }
    fn target_text(&self) -> &str {
        &self.text_target
    }
    fn english_text(&self) -> Option<&str> {
        self.text_english.as_deref()
    }
}

impl Example for MultiChoiceExample {
    fn id(&self) -> &str {
        &self.id
    }
    fn split(&self) -> Split {
        self.split
    }
    fn target_text(&self) -> &str {
        &self.passage_target
    }
    fn english_text(&self) -> Option<&str> {
        self.passage_english.as_deref()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.dev + self.test
    }
}

/// An immutable, load-ordered collection of examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    examples: Vec<T>,
}

impl<T: Example> Dataset<T> {
    pub fn new(examples: Vec<T>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, ex) in examples.iter().enumerate() {
            if !seen.insert(ex.id().to_string()) {
                return Err(Error::DuplicateId {
                    id: ex.id().to_string(),
                    line: i + 1,
                });
            }
        }
        Ok(Dataset { examples })
    }

    pub fn examples(&self) -> &[T] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn split(&self, split: Split) -> Vec<&T> {
        self.examples.iter().filter(|e| e.split() == split).collect()
    }

    pub fn split_counts(&self) -> SplitCounts {
        let mut c = SplitCounts::default();
        for ex in &self.examples {
            match ex.split() {
                Split::Train => c.train += 1,
                Split::Dev => c.dev += 1,
                Split::Test => c.test += 1,
            }
        }
        c
    }
}

impl<T: Serialize> Dataset<T> {
    /// Canonical JSON-lines serialization, one example per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for ex in &self.examples {
            out.push_str(&serde_json::to_string(ex).expect("example serializes"));
            out.push('\n');
        }
        out
    }
}

pub type ClassificationDataset = Dataset<LabeledExample>;
pub type MultiChoiceDataset = Dataset<MultiChoiceExample>;

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedDataset {
    Classification(ClassificationDataset),
    Multichoice(MultiChoiceDataset),
}

impl LoadedDataset {
    pub fn split_counts(&self) -> SplitCounts {
        match self {
            LoadedDataset::Classification(d) => d.split_counts(),
            LoadedDataset::Multichoice(d) => d.split_counts(),
        }
    }
}

/// Load either task's dataset. `labels` is only consulted for classification.
pub fn load_dataset(
    path: &Path,
    format: Format,
    task: Task,
    labels: &TaskLabelSet,
) -> Result<LoadedDataset> {
    match task {
        Task::Classification => {
            load_classification(path, format, labels).map(LoadedDataset::Classification)
        }
        Task::Multichoice => load_multichoice(path, format).map(LoadedDataset::Multichoice),
    }
}

pub fn load_classification(
    path: &Path,
    format: Format,
    labels: &TaskLabelSet,
) -> Result<ClassificationDataset> {
    let text = read_utf8(path)?;
    let rows = match format {
        Format::Jsonl => parse_jsonl::<LabeledExample>(path, &text)?,
        Format::Tsv => parse_tsv(path, &text, |cols, line| classification_from_tsv(path, cols, line))?,
    };
    let mut examples = Vec::with_capacity(rows.len());
    for (line, mut ex) in rows {
        validate_nonempty(path, line, "id", &ex.id)?;
        validate_nonempty(path, line, "text", &ex.text_target)?;
        ex.label = match labels.resolve(&ex.label) {
            Some(l) => l.to_string(),
            None => {
                return Err(Error::UnknownLabel {
                    label: ex.label,
                    line,
                    allowed: labels.labels().to_vec(),
                })
            }
        };
        ex.text_english = ex.text_english.filter(|t| !t.trim().is_empty());
        examples.push((line, ex));
    }
    finish(path, examples)
}

pub fn load_multichoice(path: &Path, format: Format) -> Result<MultiChoiceDataset> {
    let text = read_utf8(path)?;
    let rows = match format {
        Format::Jsonl => {
            let raw = parse_jsonl::<RawMultiChoice>(path, &text)?;
            raw.into_iter()
                .map(|(line, r)| r.into_example(path, line).map(|e| (line, e)))
                .collect::<Result<Vec<_>>>()?
        }
        Format::Tsv => parse_tsv(path, &text, |cols, line| multichoice_from_tsv(path, cols, line))?,
    };
    let mut examples = Vec::with_capacity(rows.len());
    for (line, mut ex) in rows {
        validate_nonempty(path, line, "id", &ex.id)?;
        validate_nonempty(path, line, "passage", &ex.passage_target)?;
        if ex.answer_index > 3 {
            return Err(malformed(path, line, format!("answer index {} outside 0..=3", ex.answer_index)));
        }
        ex.passage_english = ex.passage_english.filter(|t| !t.trim().is_empty());
        examples.push((line, ex));
    }
    finish(path, examples)
}

fn finish<T: Example>(path: &Path, rows: Vec<(usize, T)>) -> Result<Dataset<T>> {
    if rows.is_empty() {
        return Err(Error::NoExamples {
            path: path.to_path_buf(),
        });
    }
    let mut seen = HashSet::new();
    for (line, ex) in &rows {
        if !seen.insert(ex.id().to_string()) {
            return Err(Error::DuplicateId {
                id: ex.id().to_string(),
                line: *line,
            });
        }
    }
    let dataset = Dataset {
        examples: rows.into_iter().map(|(_, e)| e).collect(),
    };
    let c = dataset.split_counts();
    tracing::info!(
        path = %path.display(),
        train = c.train,
        dev = c.dev,
        test = c.test,
        "loaded dataset"
    );
    Ok(dataset)
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn validate_nonempty(path: &Path, line: usize, field: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        Err(malformed(path, line, format!("field {field:?} is empty")))
    } else {
        Ok(())
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0xEF, 0xBB, 0xBF]) {
        return Err(Error::Bom {
            path: path.to_path_buf(),
        });
    }
    String::from_utf8(bytes).map_err(|e| {
        let valid = e.utf8_error().valid_up_to();
        let line = 1 + e.as_bytes()[..valid].iter().filter(|b| **b == b'\n').count();
        Error::InvalidUtf8 {
            path: path.to_path_buf(),
            line,
        }
    })
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(line).map_err(|e| malformed(path, idx + 1, e.to_string()))?;
        out.push((idx + 1, row));
    }
    Ok(out)
}

fn parse_tsv<T>(
    path: &Path,
    text: &str,
    mut row: impl FnMut(&BTreeMap<&str, &str>, usize) -> Result<T>,
) -> Result<Vec<(usize, T)>> {
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = match lines.next() {
        Some((_, h)) => h.split('\t').map(str::trim).collect(),
        None => return Ok(Vec::new()),
    };
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != header.len() {
            return Err(malformed(
                path,
                idx + 1,
                format!("expected {} columns, found {}", header.len(), cells.len()),
            ));
        }
        let cols: BTreeMap<&str, &str> = header.iter().copied().zip(cells).collect();
        out.push((idx + 1, row(&cols, idx + 1)?));
    }
    Ok(out)
}

fn required<'a>(path: &Path, cols: &BTreeMap<&str, &'a str>, name: &str, line: usize) -> Result<&'a str> {
    cols.get(name)
        .copied()
        .ok_or_else(|| malformed(path, line, format!("missing column {name:?}")))
}

fn optional(cols: &BTreeMap<&str, &str>, name: &str) -> Option<String> {
    cols.get(name)
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.to_string())
}

fn parse_split(path: &Path, raw: &str, line: usize) -> Result<Split> {
    raw.parse().map_err(|e: String| malformed(path, line, e))
}

fn classification_from_tsv(path: &Path, cols: &BTreeMap<&str, &str>, line: usize) -> Result<LabeledExample> {
    Ok(LabeledExample {
        id: required(path, cols, "id", line)?.to_string(),
        text_target: required(path, cols, "text", line)?.to_string(),
        text_english: optional(cols, "text_en"),
        label: required(path, cols, "label", line)?.to_string(),
        split: parse_split(path, required(path, cols, "split", line)?, line)?,
    })
}

fn multichoice_from_tsv(path: &Path, cols: &BTreeMap<&str, &str>, line: usize) -> Result<MultiChoiceExample> {
    let mut choices: [String; 4] = Default::default();
    for (slot, name) in choices.iter_mut().zip(["choice_a", "choice_b", "choice_c", "choice_d"]) {
        let v = required(path, cols, name, line)?;
        if v.trim().is_empty() {
            return Err(malformed(path, line, format!("missing choice {name:?}")));
        }
        *slot = v.to_string();
    }
    let answer = required(path, cols, "answer", line)?;
    Ok(MultiChoiceExample {
        id: required(path, cols, "id", line)?.to_string(),
        passage_target: required(path, cols, "passage", line)?.to_string(),
        passage_english: optional(cols, "passage_en"),
        question: required(path, cols, "question", line)?.to_string(),
        choices,
        answer_index: answer
            .trim()
            .parse()
            .map_err(|_| malformed(path, line, format!("answer {answer:?} is not an index")))?,
        split: parse_split(path, required(path, cols, "split", line)?, line)?,
    })
}

#[derive(Deserialize)]
struct RawMultiChoice {
    id: String,
    passage: String,
    #[serde(default)]
    passage_en: Option<String>,
    question: String,
    choices: Vec<String>,
    answer: usize,
    split: Split,
}

impl RawMultiChoice {
    fn into_example(self, path: &Path, line: usize) -> Result<MultiChoiceExample> {
        let n = self.choices.len();
        let choices: [String; 4] = self
            .choices
            .try_into()
            .map_err(|_| malformed(path, line, format!("expected exactly 4 choices, found {n}")))?;
        if let Some(i) = choices.iter().position(|c| c.trim().is_empty()) {
            return Err(malformed(path, line, format!("choice {i} is empty")));
        }
        Ok(MultiChoiceExample {
            id: self.id,
            passage_target: self.passage,
            passage_english: self.passage_en,
            question: self.question,
            choices,
            answer_index: self.answer,
            split: self.split,
        })
    }
}

/// One target-language sentence and its English translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub target: String,
    pub english: String,
}

/// Sentence-aligned target/English text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub language_code: String,
    pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    pub fn new(language_code: impl Into<String>, pairs: Vec<SentencePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::NoParallelPairs { examined: 0 });
        }
        for (i, p) in pairs.iter().enumerate() {
            if p.target.trim().is_empty() || p.english.trim().is_empty() {
                return Err(Error::AlignmentInput {
                    pair: i,
                    message: "one side of the pair is empty".into(),
                });
            }
        }
        Ok(ParallelCorpus {
            language_code: language_code.into(),
            pairs,
        })
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Parse the `target ||| english` one-pair-per-line format.
    pub fn from_fast_align(language_code: impl Into<String>, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (src, tgt) = line.split_once("|||").ok_or_else(|| Error::AlignmentInput {
                pair: idx,
                message: "missing ||| separator".into(),
            })?;
            pairs.push(SentencePair {
                target: src.trim().to_string(),
                english: tgt.trim().to_string(),
            });
        }
        ParallelCorpus::new(language_code, pairs)
    }

    pub fn to_fast_align(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&p.target);
            out.push_str(" ||| ");
            out.push_str(&p.english);
            out.push('\n');
        }
        out
    }
}

/// Result of [`make_parallel`]: the corpus plus the ids that had no English side.
#[derive(Debug, Clone)]
pub struct ParallelExtraction {
    pub corpus: ParallelCorpus,
    pub skipped_ids: Vec<String>,
}

/// Pair every example's target text with its English side, in input order.
pub fn make_parallel<'a, T, I>(examples: I, language_code: &str) -> Result<ParallelExtraction>
where
    T: Example + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut pairs = Vec::new();
    let mut skipped_ids = Vec::new();
    let mut examined = 0;
    for ex in examples {
        examined += 1;
        match ex.english_text() {
            Some(en) if !en.trim().is_empty() => pairs.push(SentencePair {
                target: ex.target_text().to_string(),
                english: en.to_string(),
            }),
            _ => skipped_ids.push(ex.id().to_string()),
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoParallelPairs { examined });
    }
    if !skipped_ids.is_empty() {
        tracing::warn!(
            skipped = skipped_ids.len(),
            kept = pairs.len(),
            "examples without an English side left out of the parallel corpus"
        );
    }
    Ok(ParallelExtraction {
        corpus: ParallelCorpus::new(language_code, pairs)?,
        skipped_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &[u8], ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content).unwrap();
        f
    }

    fn row(id: &str, label: &str, split: &str, en: Option<&str>) -> String {
        serde_json::json!({"id": id, "text": format!("t {id}"), "text_en": en, "label": label, "split": split})
            .to_string()
    }

    #[test]
    fn empty_file_has_no_examples() {
        let f = write_tmp(b"", ".jsonl");
        let err = load_classification(f.path(), Format::Jsonl, &TaskLabelSet::sib_topics()).unwrap_err();
        assert!(err.to_string().contains("no examples"), "{err}");
    }

    #[test]
    fn bom_is_rejected() {
        let mut content = vec![0xEF, 0xBB, 0xBF];
        content.extend_from_slice(row("a", "travel", "train", None).as_bytes());
        let f = write_tmp(&content, ".jsonl");
        let err = load_classification(f.path(), Format::Jsonl, &TaskLabelSet::sib_topics()).unwrap_err();
        assert!(matches!(err, Error::Bom { .. }));
    }

    #[test]
    fn malformed_row_names_its_line() {
        let content = format!("{}\n{{not json\n", row("a", "travel", "train", None));
        let f = write_tmp(content.as_bytes(), ".jsonl");
        match load_classification(f.path(), Format::Jsonl, &TaskLabelSet::sib_topics()).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_id_and_unknown_label_fail() {
        let content = format!("{}\n{}\n", row("a", "travel", "train", None), row("a", "sports", "dev", None));
        let f = write_tmp(content.as_bytes(), ".jsonl");
        let err = load_classification(f.path(), Format::Jsonl, &TaskLabelSet::sib_topics()).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { line: 2, .. }), "{err}");

        let content = format!("{}\n", row("a", "cooking", "train", None));
        let f = write_tmp(content.as_bytes(), ".jsonl");
        let err = load_classification(f.path(), Format::Jsonl, &TaskLabelSet::sib_topics()).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { line: 1, .. }), "{err}");
    }

    #[test]
    fn labels_are_normalized() {
        let content = format!("{}\n", row("a", "Sports ", "test", None));
        let f = write_tmp(content.as_bytes(), ".jsonl");
        let ds = load_classification(f.path(), Format::Jsonl, &TaskLabelSet::sib_topics()).unwrap();
        assert_eq!(ds.examples()[0].label, "sports");
    }

    #[test]
    fn tsv_classification_with_header() {
        let content = "id\ttext\ttext_en\tlabel\tsplit\n1\tka ro\tdog runs\tSports\ttrain\n2\tro\t\thealth\ttest\n";
        let f = write_tmp(content.as_bytes(), ".tsv");
        let ds = load_classification(f.path(), Format::Tsv, &TaskLabelSet::sib_topics()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.examples()[0].text_english.as_deref(), Some("dog runs"));
        assert_eq!(ds.examples()[1].text_english, None);
        assert_eq!(ds.split_counts(), SplitCounts { train: 1, dev: 0, test: 1 });
    }

    #[test]
    fn multichoice_needs_four_choices() {
        let ok = serde_json::json!({"id":"q1","passage":"p","question":"q?","choices":["a","b","c","d"],"answer":2,"split":"test"});
        let bad = serde_json::json!({"id":"q2","passage":"p","question":"q?","choices":["a","b","c"],"answer":0,"split":"test"});
        let f = write_tmp(format!("{ok}\n").as_bytes(), ".jsonl");
        let ds = load_multichoice(f.path(), Format::Jsonl).unwrap();
        assert_eq!(ds.examples()[0].answer_index, 2);
        let f = write_tmp(format!("{ok}\n{bad}\n").as_bytes(), ".jsonl");
        match load_multichoice(f.path(), Format::Jsonl).unwrap_err() {
            Error::Malformed { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("exactly 4"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn make_parallel_counts_and_errors() {
        let mk = |id: &str, en: Option<&str>| LabeledExample {
            id: id.into(),
            text_target: format!("tgt {id}"),
            text_english: en.map(str::to_string),
            label: "travel".into(),
            split: Split::Train,
        };
        let mixed = vec![
            mk("1", Some("one")),
            mk("2", None),
            mk("3", Some("three")),
            mk("4", None),
            mk("5", Some("five")),
        ];
        let out = make_parallel(&mixed, "xxx_Latn").unwrap();
        assert_eq!(out.corpus.len(), 3);
        assert_eq!(out.skipped_ids, vec!["2", "4"]);
        assert_eq!(out.corpus.pairs()[1].english, "three");

        let none = vec![mk("1", None), mk("2", None)];
        assert!(matches!(
            make_parallel(&none, "xxx_Latn").unwrap_err(),
            Error::NoParallelPairs { examined: 2 }
        ));
    }

    #[test]
    fn fast_align_format_round_trips() {
        let c = ParallelCorpus::from_fast_align("x", "ka ro ||| dog runs\n\nro ||| runs\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.to_fast_align(), "ka ro ||| dog runs\nro ||| runs\n");
        assert!(ParallelCorpus::from_fast_align("x", "ka ro dog runs\n").is_err());
        assert!(ParallelCorpus::from_fast_align("x", "ka ||| \n").is_err());
    }

    #[test]
    fn label_set_rejects_duplicates_after_normalization() {
        assert!(TaskLabelSet::new(["Travel", " travel"]).is_err());
        assert!(TaskLabelSet::new(Vec::<String>::new()).is_err());
        let s = TaskLabelSet::new(["A", "b"]).unwrap();
        assert_eq!(s.labels(), ["a", "b"]);
    }
}
