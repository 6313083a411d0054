//! Byte-exact prompt rendering for every in-context-learning variant.
//!
//! Every rendering keeps an ordered list of provenance segments whose
//! concatenation is exactly the prompt text. Segment boundaries follow the
//! logical parts of the prompt (task description, demonstrations, glosses,
//! input, separators) so that audits can attribute every byte.
//!
//! Canonical layouts (classification; `D` = task description):
//!
//! ```text
//! baseline_zero      D Text: {x}. Topic option is:
//! word_alignment     D I Text: {x}. w1 means e1 in English; w2 means e2 in English. Topic option is:
//! word_translation   D' Text: {e1 e2 ...}. Topic option is:
//! sentence_alignment F D Text: {x}. Topic option is:
//! fewshot (before)   D\n{demo}\n{demo}\nText: {x}. Topic option is:
//! fewshot (after)    {demo}\n{demo}\nD Text: {x}. Topic option is:
//! ```
//!
//! where `I` is the word-alignment instruction, `D'` is the description with
//! the language named "English", and `F` is the sentence-alignment framing.
//! Multiple-choice prompts use the same structure around a
//! passage/query/choices block separated by newlines.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::aligner::Dictionary;
use crate::corpus::{whitespace_tokens, LabeledExample, MultiChoiceExample, Task, TaskLabelSet};
use crate::error::{Error, Result};

pub const MAX_SENTENCE_PAIRS: usize = 5;
const CHOICE_LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    BaselineZero,
    WordAlignment,
    WordTranslation,
    SentenceAlignment,
    FewshotPlain,
    FewshotAligned,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::BaselineZero,
        Variant::WordAlignment,
        Variant::WordTranslation,
        Variant::SentenceAlignment,
        Variant::FewshotPlain,
        Variant::FewshotAligned,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::BaselineZero => "baseline_zero",
            Variant::WordAlignment => "word_alignment",
            Variant::WordTranslation => "word_translation",
            Variant::SentenceAlignment => "sentence_alignment",
            Variant::FewshotPlain => "fewshot_plain",
            Variant::FewshotAligned => "fewshot_aligned",
        }
    }

    /// Variants that take no retrieved examples.
    pub fn is_zero_shot(self) -> bool {
        matches!(self, Variant::BaselineZero | Variant::WordAlignment | Variant::WordTranslation)
    }

    pub fn is_fewshot(self) -> bool {
        matches!(self, Variant::FewshotPlain | Variant::FewshotAligned)
    }

    pub fn needs_dictionary(self) -> bool {
        matches!(self, Variant::WordAlignment | Variant::WordTranslation)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == key)
            .ok_or_else(|| Error::PromptSpec(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DescriptionPosition {
    #[default]
    BeforeExamples,
    AfterExamples,
}

impl DescriptionPosition {
    pub fn as_str(self) -> &'static str {
        match self {
            DescriptionPosition::BeforeExamples => "before_examples",
            DescriptionPosition::AfterExamples => "after_examples",
        }
    }
}

impl std::str::FromStr for DescriptionPosition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "before" | "before_examples" => Ok(DescriptionPosition::BeforeExamples),
            "after" | "after_examples" => Ok(DescriptionPosition::AfterExamples),
            _ => Err(Error::PromptSpec(format!("unknown description position {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub variant: Variant,
    pub language_name: String,
    pub task: Task,
    /// Retrieved examples: sentence pairs or demonstrations.
    pub k: usize,
    pub description_position: DescriptionPosition,
    pub label_set: TaskLabelSet,
}

impl PromptSpec {
    pub fn new(variant: Variant, language_name: impl Into<String>, task: Task, k: usize) -> Self {
        PromptSpec {
            variant,
            language_name: language_name.into(),
            task,
            k,
            description_position: DescriptionPosition::BeforeExamples,
            label_set: TaskLabelSet::sib_topics(),
        }
    }

    pub fn with_position(mut self, position: DescriptionPosition) -> Self {
        self.description_position = position;
        self
    }

    pub fn with_labels(mut self, labels: TaskLabelSet) -> Self {
        self.label_set = labels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.language_name.trim().is_empty() {
            return Err(Error::PromptSpec("language name is empty".into()));
        }
        if self.variant.is_zero_shot() && self.k != 0 {
            return Err(Error::PromptSpec(format!("{} takes no examples, but k = {}", self.variant, self.k)));
        }
        if !self.variant.is_zero_shot() && self.k == 0 {
            return Err(Error::PromptSpec(format!("{} needs k >= 1", self.variant)));
        }
        if self.variant == Variant::SentenceAlignment && self.k > MAX_SENTENCE_PAIRS {
            return Err(Error::PromptSpec(format!(
                "sentence_alignment supports 1 to {MAX_SENTENCE_PAIRS} pairs, got k = {}",
                self.k
            )));
        }
        Ok(())
    }

    fn expect(&self, task: Task, variants: &[Variant]) -> Result<()> {
        self.validate()?;
        if self.task != task {
            return Err(Error::PromptSpec(format!("spec is for {:?}, renderer is for {task:?}", self.task)));
        }
        if !variants.contains(&self.variant) {
            return Err(Error::PromptSpec(format!("renderer cannot produce variant {}", self.variant)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Description,
    /// Word-alignment usage instruction.
    Instruction,
    /// Sentence-alignment framing text around the pairs.
    Framing,
    AlignmentPair,
    Demonstration,
    Input,
    Gloss,
    /// Zero-length marker for a token that had no dictionary entry.
    OmittedGloss,
    /// Answer cue that anchors greedy decoding.
    Cue,
    Separator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub source_id: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub variant: Variant,
    pub text: String,
    pub provenance: Vec<Segment>,
}

impl RenderedPrompt {
    /// True when the segments concatenate to the text.
    pub fn provenance_consistent(&self) -> bool {
        let joined: String = self.provenance.iter().map(|s| s.text.as_str()).collect();
        joined == self.text
    }

    pub fn segments(&self, kind: SegmentKind) -> impl Iterator<Item = &Segment> {
        self.provenance.iter().filter(move |s| s.kind == kind)
    }
}

struct Builder {
    variant: Variant,
    text: String,
    segments: Vec<Segment>,
}

impl Builder {
    fn new(variant: Variant) -> Self {
        Builder { variant, text: String::new(), segments: Vec::new() }
    }

    fn push(&mut self, kind: SegmentKind, source_id: Option<&str>, text: impl Into<String>) -> &mut Self {
        let text = text.into();
        self.text.push_str(&text);
        self.segments.push(Segment { kind, source_id: source_id.map(str::to_string), text });
        self
    }

    fn sep(&mut self, text: &str) -> &mut Self {
        self.push(SegmentKind::Separator, None, text)
    }

    fn append(&mut self, parts: Vec<Segment>) -> &mut Self {
        for s in parts {
            self.text.push_str(&s.text);
            self.segments.push(s);
        }
        self
    }

    fn finish(self) -> RenderedPrompt {
        RenderedPrompt { variant: self.variant, text: self.text, provenance: self.segments }
    }
}

fn seg(kind: SegmentKind, source_id: Option<&str>, text: impl Into<String>) -> Segment {
    Segment { kind, source_id: source_id.map(str::to_string), text: text.into() }
}

fn count_word(n: usize) -> String {
    const WORDS: [&str; 21] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
        "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
    ];
    WORDS.get(n).map(|w| w.to_string()).unwrap_or_else(|| n.to_string())
}

/// Quoted options joined with commas and a final ", and".
fn options_list(labels: &[String]) -> String {
    let quoted: Vec<String> = labels.iter().map(|l| format!("\"{l}\"")).collect();
    match quoted.len() {
        0 => String::new(),
        1 => quoted[0].clone(),
        2 => format!("{} and {}", quoted[0], quoted[1]),
        n => format!("{}, and {}", quoted[..n - 1].join(", "), quoted[n - 1]),
    }
}

/// Topic-classification task description for a language.
pub fn classification_description(language_name: &str, labels: &TaskLabelSet) -> String {
    let n = labels.len();
    let options = if n == 1 {
        format!("There is one option: {}.", options_list(labels.labels()))
    } else {
        format!("There are {} options: {}.", count_word(n), options_list(labels.labels()))
    };
    format!(
        "What is the topic discussed in the following {language_name} text? {options} Now complete the following example without explanations."
    )
}

pub const MULTICHOICE_DESCRIPTION: &str =
    "Given the following passage, query, and answer choices, output the letter corresponding to the correct answer.";

fn word_alignment_instruction(language_name: &str) -> String {
    format!("Please use the provided English translation of each word to help you understand the {language_name} text.")
}

fn framing_open(language_name: &str) -> String {
    format!(
        "Use the following pairs of {language_name} texts and their English translations to help you understand {language_name}."
    )
}

const FRAMING_CLOSE: &str = "Now based on your understanding, answer the question below without explanation.";
const TOPIC_CUE: &str = "Topic option is:";

fn non_empty<'a>(text: &'a str, what: &'static str) -> Result<&'a str> {
    if text.trim().is_empty() {
        Err(Error::Render(format!("{what} is empty")))
    } else {
        Ok(text)
    }
}

/// Gloss clauses for every token of `text`, omitted tokens marked with
/// empty segments. Returns the segments and whether any clause was emitted.
fn gloss_clauses(text: &str, dictionary: &Dictionary) -> (Vec<Segment>, usize) {
    let mut out = Vec::new();
    let mut emitted = 0;
    for token in whitespace_tokens(text) {
        match dictionary.translate(token) {
            Some(english) => {
                if emitted > 0 {
                    out.push(seg(SegmentKind::Separator, None, "; "));
                }
                out.push(seg(SegmentKind::Gloss, Some(token), format!("{token} means {english} in English")));
                emitted += 1;
            }
            None => out.push(seg(SegmentKind::OmittedGloss, Some(token), "")),
        }
    }
    if emitted > 0 {
        out.push(seg(SegmentKind::Separator, None, "."));
    }
    (out, emitted)
}

/// English glosses of the tokens in order; errors when nothing translates.
fn translate_words(text: &str, dictionary: &Dictionary) -> Result<(String, Vec<String>)> {
    let mut words = Vec::new();
    let mut omitted = Vec::new();
    for token in whitespace_tokens(text) {
        match dictionary.translate(token) {
            Some(e) => words.push(e.to_string()),
            None => omitted.push(token.to_string()),
        }
    }
    if words.is_empty() {
        return Err(Error::Render("no token of the input has a dictionary entry".into()));
    }
    Ok((words.join(" "), omitted))
}

fn require_dictionary(dictionary: &Dictionary) -> Result<()> {
    if dictionary.is_empty() {
        Err(Error::Render("dictionary is empty".into()))
    } else {
        Ok(())
    }
}

fn sentence_framing(language_name: &str, pairs: &[(&str, &str)]) -> Result<Vec<Segment>> {
    if pairs.is_empty() {
        return Err(Error::Render("sentence alignment needs at least one pair".into()));
    }
    if pairs.len() > MAX_SENTENCE_PAIRS {
        return Err(Error::Render(format!("at most {MAX_SENTENCE_PAIRS} sentence pairs are supported")));
    }
    let mut out = vec![seg(SegmentKind::Framing, None, framing_open(language_name)), seg(SegmentKind::Separator, None, " ")];
    for (idx, (tgt, eng)) in pairs.iter().enumerate() {
        non_empty(tgt, "alignment sentence")?;
        non_empty(eng, "alignment translation")?;
        if idx > 0 {
            out.push(seg(SegmentKind::Separator, None, "; "));
        }
        let id = format!("pair{idx}");
        out.push(seg(SegmentKind::AlignmentPair, Some(&id), format!("{language_name}: {tgt}; English: {eng}")));
    }
    out.push(seg(SegmentKind::Separator, None, ". "));
    out.push(seg(SegmentKind::Framing, None, FRAMING_CLOSE));
    Ok(out)
}

// ---------------------------------------------------------------- classification

fn classification_input(b: &mut Builder, text: &str) {
    b.push(SegmentKind::Input, Some("input"), format!("Text: {text}."))
        .sep(" ")
        .push(SegmentKind::Cue, None, TOPIC_CUE);
}

pub fn render_baseline(spec: &PromptSpec, input_target: &str) -> Result<RenderedPrompt> {
    spec.expect(Task::Classification, &[Variant::BaselineZero])?;
    non_empty(input_target, "input")?;
    let mut b = Builder::new(spec.variant);
    b.push(SegmentKind::Description, None, classification_description(&spec.language_name, &spec.label_set))
        .sep(" ");
    classification_input(&mut b, input_target);
    Ok(b.finish())
}

pub fn render_word_alignment(spec: &PromptSpec, input_target: &str, dictionary: &Dictionary) -> Result<RenderedPrompt> {
    spec.expect(Task::Classification, &[Variant::WordAlignment])?;
    non_empty(input_target, "input")?;
    require_dictionary(dictionary)?;
    let (clauses, emitted) = gloss_clauses(input_target, dictionary);
    let mut b = Builder::new(spec.variant);
    b.push(SegmentKind::Description, None, classification_description(&spec.language_name, &spec.label_set))
        .sep(" ")
        .push(SegmentKind::Instruction, None, word_alignment_instruction(&spec.language_name))
        .sep(" ")
        .push(SegmentKind::Input, Some("input"), format!("Text: {input_target}."));
    if emitted > 0 {
        b.sep(" ");
    }
    b.append(clauses).sep(" ").push(SegmentKind::Cue, None, TOPIC_CUE);
    Ok(b.finish())
}

pub fn render_word_translation(spec: &PromptSpec, input_target: &str, dictionary: &Dictionary) -> Result<RenderedPrompt> {
    spec.expect(Task::Classification, &[Variant::WordTranslation])?;
    non_empty(input_target, "input")?;
    require_dictionary(dictionary)?;
    let (glossed, omitted) = translate_words(input_target, dictionary)?;
    let mut b = Builder::new(spec.variant);
    b.push(SegmentKind::Description, None, classification_description("English", &spec.label_set)).sep(" ");
    for token in &omitted {
        b.push(SegmentKind::OmittedGloss, Some(token), "");
    }
    classification_input(&mut b, &glossed);
    Ok(b.finish())
}

pub fn render_sentence_alignment(spec: &PromptSpec, input_target: &str, pairs: &[(&str, &str)]) -> Result<RenderedPrompt> {
    spec.expect(Task::Classification, &[Variant::SentenceAlignment])?;
    non_empty(input_target, "input")?;
    let mut b = Builder::new(spec.variant);
    b.append(sentence_framing(&spec.language_name, pairs)?)
        .sep(" ")
        .push(SegmentKind::Description, None, classification_description(&spec.language_name, &spec.label_set))
        .sep(" ");
    classification_input(&mut b, input_target);
    Ok(b.finish())
}

fn classification_demo(demo: &LabeledExample, with_alignment: bool) -> Result<Segment> {
    non_empty(&demo.text_target, "demonstration text")?;
    let body = if with_alignment {
        let eng = demo
            .text_english
            .as_deref()
            .filter(|e| !e.trim().is_empty())
            .ok_or_else(|| Error::Render(format!("demonstration {} has no English side", demo.id)))?;
        format!("{} means {eng} in English", demo.text_target)
    } else {
        demo.text_target.clone()
    };
    Ok(seg(
        SegmentKind::Demonstration,
        Some(&demo.id),
        format!("Text: {body}. {TOPIC_CUE} {}", demo.label),
    ))
}

pub fn render_fewshot(
    spec: &PromptSpec,
    input_target: &str,
    demos: &[&LabeledExample],
    with_alignment: bool,
) -> Result<RenderedPrompt> {
    let variant = if with_alignment { Variant::FewshotAligned } else { Variant::FewshotPlain };
    spec.expect(Task::Classification, &[variant])?;
    non_empty(input_target, "input")?;
    if demos.is_empty() {
        return Err(Error::Render("few-shot prompting needs at least one demonstration".into()));
    }
    let mut demo_segments = Vec::new();
    for (idx, d) in demos.iter().enumerate() {
        if idx > 0 {
            demo_segments.push(seg(SegmentKind::Separator, None, "\n"));
        }
        demo_segments.push(classification_demo(d, with_alignment)?);
    }
    let description = classification_description(&spec.language_name, &spec.label_set);
    let mut b = Builder::new(spec.variant);
    match spec.description_position {
        DescriptionPosition::BeforeExamples => {
            b.push(SegmentKind::Description, None, description).sep("\n").append(demo_segments).sep("\n");
        }
        DescriptionPosition::AfterExamples => {
            b.append(demo_segments).sep("\n").push(SegmentKind::Description, None, description).sep(" ");
        }
    }
    classification_input(&mut b, input_target);
    Ok(b.finish())
}

// ---------------------------------------------------------------- multiple choice

/// Retrieved material for a multiple-choice rendering.
#[derive(Debug, Clone, Copy, Default)]
pub struct MultiChoiceAids<'a> {
    pub dictionary: Option<&'a Dictionary>,
    /// (target passage, English passage) pairs for passage alignment.
    pub passage_pairs: &'a [(&'a str, &'a str)],
    pub demos: &'a [&'a MultiChoiceExample],
}

fn choice_block(question: &str, choices: &[String]) -> Result<String> {
    if choices.len() != 4 {
        return Err(Error::Render(format!("expected 4 choices, got {}", choices.len())));
    }
    let mut out = format!("###\nQuery:\n{question}\n###\nChoices:");
    for (letter, choice) in CHOICE_LETTERS.iter().zip(choices) {
        if choice.trim().is_empty() {
            return Err(Error::Render(format!("choice {letter} is empty")));
        }
        out.push_str(&format!("\n({letter}) {choice}"));
    }
    out.push_str("\n###");
    Ok(out)
}

fn mc_item(passage: &str, question: &str, choices: &[String]) -> Result<(String, String)> {
    non_empty(passage, "passage")?;
    non_empty(question, "question")?;
    Ok((format!("###\nPassage:\n{passage}\n"), choice_block(question, choices)?))
}

fn mc_demo(demo: &MultiChoiceExample, with_alignment: bool) -> Result<Segment> {
    let passage = if with_alignment {
        let eng = demo
            .passage_english
            .as_deref()
            .filter(|e| !e.trim().is_empty())
            .ok_or_else(|| Error::Render(format!("demonstration {} has no English passage", demo.id)))?;
        format!("{} means {eng} in English", demo.passage_target)
    } else {
        demo.passage_target.clone()
    };
    let (p, rest) = mc_item(&passage, &demo.question, &demo.choices)?;
    let letter = CHOICE_LETTERS
        .get(demo.answer_index)
        .ok_or_else(|| Error::Render(format!("demonstration {} has answer index {}", demo.id, demo.answer_index)))?;
    Ok(seg(SegmentKind::Demonstration, Some(&demo.id), format!("{p}{rest}\nAnswer: {letter}")))
}

/// Render a multiple-choice prompt for any variant; `aids` must carry what
/// the variant needs (dictionary, passage pairs or demonstrations).
pub fn render_multichoice(
    spec: &PromptSpec,
    example: &MultiChoiceExample,
    aids: MultiChoiceAids<'_>,
) -> Result<RenderedPrompt> {
    spec.expect(Task::Multichoice, &Variant::ALL)?;
    let dictionary = || -> Result<&Dictionary> {
        let d = aids
            .dictionary
            .ok_or_else(|| Error::Render(format!("{} needs a dictionary", spec.variant)))?;
        require_dictionary(d)?;
        Ok(d)
    };
    let mut b = Builder::new(spec.variant);
    let input_passage: String;
    let mut gloss_segments = Vec::new();
    match spec.variant {
        Variant::BaselineZero => {
            b.push(SegmentKind::Description, None, MULTICHOICE_DESCRIPTION).sep("\n");
            input_passage = example.passage_target.clone();
        }
        Variant::WordAlignment => {
            let d = dictionary()?;
            b.push(SegmentKind::Description, None, MULTICHOICE_DESCRIPTION)
                .sep(" ")
                .push(SegmentKind::Instruction, None, word_alignment_instruction(&spec.language_name))
                .sep("\n");
            input_passage = example.passage_target.clone();
            let (clauses, emitted) = gloss_clauses(&example.passage_target, d);
            gloss_segments = clauses;
            if emitted > 0 {
                gloss_segments.push(seg(SegmentKind::Separator, None, "\n"));
            }
        }
        Variant::WordTranslation => {
            let d = dictionary()?;
            let (glossed, omitted) = translate_words(&example.passage_target, d)?;
            b.push(SegmentKind::Description, None, MULTICHOICE_DESCRIPTION).sep("\n");
            for token in &omitted {
                b.push(SegmentKind::OmittedGloss, Some(token), "");
            }
            input_passage = glossed;
        }
        Variant::SentenceAlignment => {
            b.append(sentence_framing(&spec.language_name, aids.passage_pairs)?)
                .sep("\n")
                .push(SegmentKind::Description, None, MULTICHOICE_DESCRIPTION)
                .sep("\n");
            input_passage = example.passage_target.clone();
        }
        Variant::FewshotPlain | Variant::FewshotAligned => {
            if aids.demos.is_empty() {
                return Err(Error::Render("few-shot prompting needs at least one demonstration".into()));
            }
            let aligned = spec.variant == Variant::FewshotAligned;
            let mut demos = Vec::new();
            for (idx, d) in aids.demos.iter().enumerate() {
                if idx > 0 {
                    demos.push(seg(SegmentKind::Separator, None, "\n"));
                }
                demos.push(mc_demo(d, aligned)?);
            }
            match spec.description_position {
                DescriptionPosition::BeforeExamples => {
                    b.push(SegmentKind::Description, None, MULTICHOICE_DESCRIPTION).sep("\n").append(demos).sep("\n");
                }
                DescriptionPosition::AfterExamples => {
                    b.append(demos).sep("\n").push(SegmentKind::Description, None, MULTICHOICE_DESCRIPTION).sep("\n");
                }
            }
            input_passage = example.passage_target.clone();
        }
    }
    let (passage, rest) = mc_item(&input_passage, &example.question, &example.choices)?;
    b.push(SegmentKind::Input, Some(&example.id), passage)
        .append(gloss_segments)
        .push(SegmentKind::Input, Some(&example.id), rest)
        .sep("\n")
        .push(SegmentKind::Cue, None, "Answer:");
    Ok(b.finish())
}

// ---------------------------------------------------------------- dispatch

/// Retrieved material for a classification rendering.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassificationAids<'a> {
    pub dictionary: Option<&'a Dictionary>,
    pub pairs: &'a [(&'a str, &'a str)],
    pub demos: &'a [&'a LabeledExample],
}

/// Render a classification prompt for whichever variant the spec names.
pub fn render_classification(spec: &PromptSpec, input_target: &str, aids: ClassificationAids<'_>) -> Result<RenderedPrompt> {
    let dictionary = || {
        aids.dictionary
            .ok_or_else(|| Error::Render(format!("{} needs a dictionary", spec.variant)))
    };
    match spec.variant {
        Variant::BaselineZero => render_baseline(spec, input_target),
        Variant::WordAlignment => render_word_alignment(spec, input_target, dictionary()?),
        Variant::WordTranslation => render_word_translation(spec, input_target, dictionary()?),
        Variant::SentenceAlignment => render_sentence_alignment(spec, input_target, aids.pairs),
        Variant::FewshotPlain => render_fewshot(spec, input_target, aids.demos, false),
        Variant::FewshotAligned => render_fewshot(spec, input_target, aids.demos, true),
    }
}
