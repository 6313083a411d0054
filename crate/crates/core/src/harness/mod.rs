//! Evaluation harness: backends, output parsing and evaluation runs.

pub mod backend;
pub mod eval;
pub mod http;
pub mod parse;

pub use backend::{BackendError, BackendErrorKind, MockBackend, MockGeneration, MockScoring, ScoringBackend, TextScore};
pub use eval::{
    check_leakage, render_prompts, run_eval, select_description_position, EvalConfig, EvalRecord, EvalReport, EvalRun, Evaluable,
    PositionSelection, RecordStatus, RenderedItem, Resources, RetryPolicy,
};
pub use http::{ApiStyle, OpenAiCompatBackend};
pub use parse::{choice_letter, parse_choice, parse_label};
