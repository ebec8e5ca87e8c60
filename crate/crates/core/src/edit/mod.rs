//! Textual edit suggestions: mined token rules, an optional model adapter,
//! and cleanup of the produced sentences.

pub mod adapter;
pub mod apply;
pub mod postprocess;
pub mod rules;
pub mod suggest;
pub mod tokens;

pub use adapter::{AdapterError, ModelAdapter, ProcessAdapter};
pub use apply::{apply_rules, Candidate, CandidateSource};
pub use postprocess::postprocess;
pub use rules::{mine_rules, read_rules, write_rules, EditRule, DEFAULT_MIN_SUPPORT};
pub use suggest::{apply_suggestions, suggest_edits, SuggestOutput, Suggestion};
