//! Sentence normalization: prose runs collapse to `COMMON_WORDS`, numbers
//! optionally to `NUM_k`, and the placeholders are restored after editing.

pub mod detect;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detect::{
    detect_math_spans, is_placeholder, number_placeholder_index, word_tokens, CommandWords, MathSpan, SpanReason,
    WordToken, COMMON_WORDS,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    /// Replace standalone numbers by `NUM_k`.
    pub numbers: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placeholder {
    pub symbol: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedSentence {
    pub template: String,
    /// One entry per placeholder occurrence, in template order.
    pub placeholder_map: Vec<Placeholder>,
}

impl NormalizedSentence {
    pub fn template_tokens(&self) -> Vec<&str> {
        self.template.split_whitespace().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template has {found} placeholders, expected {expected}")]
pub struct PlaceholderMismatch {
    pub expected: usize,
    pub found: usize,
}

pub fn normalize(sentence: &str) -> NormalizedSentence {
    normalize_with(sentence, NormalizeOptions::default(), CommandWords::builtin())
}

pub fn normalize_with(sentence: &str, options: NormalizeOptions, words: &CommandWords) -> NormalizedSentence {
    let tokens = word_tokens(sentence);
    let reasons = detect::classify(sentence, &tokens, false, words);

    let mut template = String::with_capacity(sentence.len());
    let mut placeholder_map = Vec::new();
    let mut last = 0;
    let mut numbers = 0;
    let mut i = 0;
    while i < tokens.len() {
        let start = tokens[i].range.start;
        let (end, symbol) = match reasons[i] {
            None => {
                let mut j = i;
                while j + 1 < tokens.len() && reasons[j + 1].is_none() {
                    j += 1;
                }
                i = j;
                (tokens[j].range.end, COMMON_WORDS.to_string())
            }
            Some(SpanReason::NumberToken) if options.numbers && detect_number(tokens[i].text) => {
                numbers += 1;
                (tokens[i].range.end, format!("NUM_{}", numbers - 1))
            }
            Some(_) => {
                i += 1;
                continue;
            }
        };
        template.push_str(&sentence[last..start]);
        template.push_str(&symbol);
        placeholder_map.push(Placeholder { symbol, text: sentence[start..end].to_string() });
        last = end;
        i += 1;
    }
    template.push_str(&sentence[last..]);
    NormalizedSentence { template, placeholder_map }
}

fn detect_number(token: &str) -> bool {
    !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit() || b == b'.') && token.bytes().next().is_some_and(|b| b.is_ascii_digit()) && !token.ends_with('.')
}

/// Byte ranges of placeholder tokens in a template.
fn placeholder_ranges(template: &str) -> Vec<(std::ops::Range<usize>, &str)> {
    word_tokens(template)
        .into_iter()
        .filter(|t| is_placeholder(t.text))
        .map(|t| (t.range, t.text))
        .collect()
}

/// Put the original runs back into an (edited) template.
///
/// `COMMON_WORDS` entries are filled in order and `NUM_k` by index.
pub fn denormalize(template: &str, placeholder_map: &[Placeholder]) -> Result<String, PlaceholderMismatch> {
    let found = placeholder_ranges(template);
    let expected_words = placeholder_map.iter().filter(|p| p.symbol == COMMON_WORDS).count();
    let found_words = found.iter().filter(|(_, s)| *s == COMMON_WORDS).count();
    let numbers: Vec<&Placeholder> = placeholder_map.iter().filter(|p| p.symbol != COMMON_WORDS).collect();
    let mismatch = PlaceholderMismatch { expected: placeholder_map.len(), found: found.len() };
    if found_words != expected_words {
        return Err(mismatch);
    }

    let mut words = placeholder_map.iter().filter(|p| p.symbol == COMMON_WORDS);
    let mut out = String::with_capacity(template.len() * 2);
    let mut last = 0;
    for (range, symbol) in &found {
        let text = if *symbol == COMMON_WORDS {
            &words.next().ok_or(mismatch.clone())?.text
        } else {
            &numbers.iter().find(|p| p.symbol == *symbol).ok_or(mismatch.clone())?.text
        };
        out.push_str(&template[last..range.start]);
        out.push_str(text);
        last = range.end;
    }
    out.push_str(&template[last..]);
    Ok(out)
}

/// Positional fill that never fails: surplus placeholders stay verbatim and
/// missing ones are dropped.
pub fn denormalize_lenient(template: &str, placeholder_map: &[Placeholder]) -> String {
    let mut words = placeholder_map.iter().filter(|p| p.symbol == COMMON_WORDS);
    let mut out = String::with_capacity(template.len() * 2);
    let mut last = 0;
    for (range, symbol) in placeholder_ranges(template) {
        let fill = if symbol == COMMON_WORDS {
            words.next().map(|p| p.text.as_str())
        } else {
            placeholder_map.iter().find(|p| p.symbol == symbol).map(|p| p.text.as_str())
        };
        out.push_str(&template[last..range.start]);
        out.push_str(fill.unwrap_or(symbol));
        last = range.end;
    }
    out.push_str(&template[last..]);
    out
}
