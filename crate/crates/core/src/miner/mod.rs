//! Mining sentence-level edits from post edit histories.

pub mod classify;
pub mod corpus;
pub mod distance;
pub mod dump;
pub mod formulas;
pub mod pairs;
pub mod phrases;
pub mod sentences;

pub use classify::classify_edit;
pub use corpus::{mine_corpus, MineOutput, MineStats};
pub use distance::{levenshtein, levenshtein_by, similarity_by, text_similarity};
pub use dump::{parse_dump, DumpParse, FormatError, PostRevision};
pub use formulas::extract_formulas;
pub use pairs::{align, filter_pairs, EditType, MinerConfig, SentencePair};
pub use phrases::{detect_phrases, preprocess_comment, Phrase};
pub use sentences::split_sentences;
