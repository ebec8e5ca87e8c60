use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::markup::math_regions;
use crate::miner::phrases::is_stop_word;

pub const COMMON_WORDS: &str = "COMMON_WORDS";

/// `COMMON_WORDS` or `NUM_k`.
pub fn is_placeholder(token: &str) -> bool {
    token == COMMON_WORDS || number_placeholder_index(token).is_some()
}

pub fn number_placeholder_index(token: &str) -> Option<usize> {
    let digits = token.strip_prefix("NUM_")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// A whitespace-delimited token and its byte range in the sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordToken<'a> {
    pub text: &'a str,
    pub range: Range<usize>,
}

pub fn word_tokens(sentence: &str) -> Vec<WordToken<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in sentence.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(WordToken { text: &sentence[s..i], range: s..i });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(WordToken { text: &sentence[s..], range: s..sentence.len() });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpanReason {
    NumberToken,
    VariableRun,
    OperatorRun,
    CommandToken,
    DollarDelimited,
}

/// A run of math tokens, `start_token..end_token` in word-token indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MathSpan {
    pub start_token: usize,
    pub end_token: usize,
    pub reason: SpanReason,
}

const OPERATOR_CHARS: &[char] = &['$', '+', '-', '−', '=', '*', '/', '^', '_', '\\', '{', '}', '(', ')', '<', '>', '|'];
pub(crate) const QUOTES: &[&str] = &["'", "\"", "`", "''", "``"];

/// Known plain-text spellings of math commands.
#[derive(Debug, Clone)]
pub struct CommandWords(BTreeSet<String>);

impl CommandWords {
    pub fn parse(list: &str) -> Self {
        CommandWords(
            list.lines()
                .map(|l| l.trim().to_ascii_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn builtin() -> &'static CommandWords {
        static WORDS: OnceLock<CommandWords> = OnceLock::new();
        WORDS.get_or_init(|| CommandWords::parse(include_str!("../../data/command_words.txt")))
    }

    pub fn extend(&mut self, other: &CommandWords) {
        self.0.extend(other.0.iter().cloned());
    }

    /// `word` (any case), optionally followed by digits as in `root2`.
    pub fn matches(&self, word: &str) -> bool {
        let letters = word.trim_end_matches(|c: char| c.is_ascii_digit());
        !letters.is_empty() && self.0.contains(&letters.to_ascii_lowercase())
    }
}

pub(crate) fn trim_punct(token: &str) -> &str {
    token.trim_end_matches(['.', ',', ';', ':', '?', '!'])
}

fn is_number(core: &str) -> bool {
    let mut parts = core.splitn(2, '.');
    let whole = parts.next().unwrap_or("");
    let frac = parts.next();
    !whole.is_empty()
        && whole.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn is_word(s: &str, min: usize) -> bool {
    s.len() >= min && s.bytes().all(|b| b.is_ascii_alphabetic())
}

/// Prose that happens to contain operator characters.
fn is_prose_shape(token: &str, words: &CommandWords) -> bool {
    let core = trim_punct(token);
    if core.contains("://") || core.starts_with("www.") {
        return true;
    }
    let hyphenated = core.split('-').count() > 1 && core.split('-').all(|p| is_word(p, 2));
    let slashed = core.split('/').count() == 2 && core.split('/').all(|p| is_word(p, 3));
    let plural = core.strip_suffix("(s)").is_some_and(|w| is_word(w, 2));
    let bracketed = {
        let inner = core.trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        inner.len() != core.len() && is_word(inner, 2) && !words.matches(inner)
    };
    hyphenated || slashed || plural || bracketed
}

pub(crate) fn has_operator_char(token: &str) -> bool {
    token.contains(OPERATOR_CHARS)
}

fn is_short_alnum(core: &str) -> bool {
    (1..=3).contains(&core.len()) && core.bytes().all(|b| b.is_ascii_alphanumeric())
}

/// Classify each word token of `text`. `template` is set when the text is a
/// normalized template, where `NUM_k` placeholders count as numbers.
pub(crate) fn classify(text: &str, tokens: &[WordToken], template: bool, words: &CommandWords) -> Vec<Option<SpanReason>> {
    let regions: Vec<_> = math_regions(text).into_iter().filter(|r| r.closed).collect();
    let in_dollars =
        |range: &Range<usize>| regions.iter().any(|r| r.outer.start < range.end && range.start < r.outer.end);

    let mut reasons: Vec<Option<SpanReason>> = tokens
        .iter()
        .map(|t| {
            let core = trim_punct(t.text);
            if t.text == COMMON_WORDS {
                return None;
            }
            if number_placeholder_index(t.text).is_some() {
                return template.then_some(SpanReason::NumberToken);
            }
            if in_dollars(&t.range) {
                return Some(SpanReason::DollarDelimited);
            }
            if is_prose_shape(t.text, words) {
                return None;
            }
            if t.text.contains('\\') {
                return Some(SpanReason::CommandToken);
            }
            if t.text.contains(OPERATOR_CHARS) {
                return Some(SpanReason::OperatorRun);
            }
            if is_number(core) {
                return Some(SpanReason::NumberToken);
            }
            if core.len() == 1 && core.bytes().all(|b| b.is_ascii_alphabetic()) && !matches!(core, "a" | "A" | "I") {
                return Some(SpanReason::VariableRun);
            }
            if words.matches(core) {
                return Some(SpanReason::CommandToken);
            }
            None
        })
        .collect();

    let is_operator = |r: Option<SpanReason>| matches!(r, Some(SpanReason::OperatorRun | SpanReason::CommandToken));
    let base = reasons.clone();
    for i in 0..tokens.len() {
        if reasons[i].is_some() {
            continue;
        }
        let core = trim_punct(tokens[i].text);
        let near_operator = (i > 0 && is_operator(base[i - 1])) || base.get(i + 1).is_some_and(|&r| is_operator(r));
        let short = is_short_alnum(core) && (core.len() == 1 || !is_stop_word(&core.to_ascii_lowercase()));
        if near_operator && short && !is_placeholder(tokens[i].text) {
            reasons[i] = Some(SpanReason::VariableRun);
        }
    }
    for i in 1..tokens.len().saturating_sub(1) {
        if reasons[i].is_some() || reasons[i - 1].is_none() || reasons[i + 1].is_none() {
            continue;
        }
        if tokens[i].text == "," {
            reasons[i] = Some(SpanReason::OperatorRun);
        }
    }
    for i in 1..tokens.len().saturating_sub(1) {
        let quoted = QUOTES.contains(&tokens[i - 1].text) && tokens[i - 1].text == tokens[i + 1].text;
        if quoted && reasons[i].is_some() && reasons[i - 1].is_none() && reasons[i + 1].is_none() {
            reasons[i - 1] = Some(SpanReason::VariableRun);
            reasons[i + 1] = Some(SpanReason::VariableRun);
        }
    }
    reasons
}

pub(crate) fn spans_from(reasons: &[Option<SpanReason>]) -> Vec<MathSpan> {
    let mut spans: Vec<MathSpan> = Vec::new();
    for (i, r) in reasons.iter().enumerate() {
        let Some(r) = *r else { continue };
        match spans.last_mut() {
            Some(last) if last.end_token == i => {
                last.end_token = i + 1;
                last.reason = last.reason.max(r);
            }
            _ => spans.push(MathSpan { start_token: i, end_token: i + 1, reason: r }),
        }
    }
    spans
}

/// Math spans of a sentence given as word tokens.
pub fn detect_math_spans(tokens: &[&str]) -> Vec<MathSpan> {
    let text = tokens.join(" ");
    let words = word_tokens(&text);
    spans_from(&classify(&text, &words, false, CommandWords::builtin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(s: &str) -> Vec<(usize, usize)> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        detect_math_spans(&tokens).iter().map(|m| (m.start_token, m.end_token)).collect()
    }

    #[test]
    fn variable_and_number() {
        assert_eq!(spans("the value of p is 2"), [(3, 4), (5, 6)]);
    }

    #[test]
    fn operator_run() {
        assert_eq!(spans("( 2 + e ^ x )"), [(0, 7)]);
    }

    #[test]
    fn plain_prose() {
        assert!(spans("hello world").is_empty());
    }

    #[test]
    fn dollar_span_is_one_run() {
        let tokens = ["see", "$", "f", "(", "n", ")", "$", "now"];
        let s = detect_math_spans(&tokens);
        assert_eq!((s[0].start_token, s[0].end_token, s[0].reason), (1, 7, SpanReason::DollarDelimited));
    }

    #[test]
    fn command_words() {
        assert_eq!(spans("so x - root2 here"), [(1, 4)]);
        assert_eq!(spans("take log of it"), [(1, 2)]);
    }

    #[test]
    fn prose_shapes() {
        assert!(spans("a well-known result (see below) at http://x.org/a-b").is_empty());
        assert!(spans("the value(s) given").is_empty());
    }

    #[test]
    fn short_words_near_operators() {
        assert_eq!(spans("we get y + py = px - 2p for which"), [(2, 9)]);
        assert_eq!(spans("so a + b"), [(1, 4)]);
    }

    #[test]
    fn quoted_variable() {
        assert_eq!(spans("' i ' is part"), [(0, 3)]);
    }

    #[test]
    fn comma_between_math() {
        assert_eq!(spans("primitives f ( x , y )"), [(1, 7)]);
    }

    #[test]
    fn articles_are_prose() {
        assert!(spans("I have a cat").is_empty());
    }
}
