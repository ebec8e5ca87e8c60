use std::ops::Range;

use crate::latex::{tokenize, TokenKind};
use crate::normalize::{is_placeholder, word_tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditKind {
    Letters,
    Digits,
    ControlWord,
    ControlSymbol,
    Symbol,
    Dollar,
    Placeholder,
}

/// Token unit used by rule mining and application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditToken {
    pub text: String,
    pub kind: EditKind,
    pub range: Range<usize>,
}

/// Letter runs, digit runs, commands, single symbols and atomic
/// placeholders; whitespace is dropped and ranges index into `text`.
pub fn edit_tokens(text: &str) -> Vec<EditToken> {
    let mut out: Vec<EditToken> = Vec::new();
    for word in word_tokens(text) {
        if is_placeholder(word.text) {
            out.push(EditToken { text: word.text.to_string(), kind: EditKind::Placeholder, range: word.range });
            continue;
        }
        let mut at = word.range.start;
        let mut previous_end = usize::MAX;
        for t in tokenize(word.text) {
            let range = at..at + t.text.len();
            at = range.end;
            let kind = match t.kind {
                TokenKind::Letter if t.text.chars().all(|c| c.is_ascii_alphabetic()) => EditKind::Letters,
                TokenKind::Digit => EditKind::Digits,
                TokenKind::Command if t.command_name().is_some() => EditKind::ControlWord,
                TokenKind::Other if t.text.starts_with('\\') => EditKind::ControlSymbol,
                TokenKind::Dollar => EditKind::Dollar,
                _ => EditKind::Symbol,
            };
            if let Some(last) = out.last_mut() {
                let joins = matches!(kind, EditKind::Letters | EditKind::Digits) && last.kind == kind && previous_end == range.start;
                if joins {
                    last.text.push_str(&t.text);
                    last.range.end = range.end;
                    previous_end = range.end;
                    continue;
                }
            }
            previous_end = range.end;
            out.push(EditToken { text: t.text, kind, range });
        }
    }
    out
}

/// Whether `a` followed directly by `b` would re-tokenize differently.
pub fn needs_space(a: EditKind, b: EditKind) -> bool {
    use EditKind::*;
    matches!(
        (a, b),
        (Letters, Letters) | (Digits, Digits) | (ControlWord, Letters) | (Placeholder, _) | (_, Placeholder)
    )
}

pub fn kind_of(text: &str) -> EditKind {
    edit_tokens(text).first().map(|t| t.kind).unwrap_or(EditKind::Symbol)
}

/// Join token texts with the fewest spaces that keep them apart.
pub fn compact_join<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut last: Option<EditKind> = None;
    for t in tokens {
        let t = t.as_ref();
        let kind = kind_of(t);
        if last.is_some_and(|l| needs_space(l, kind)) {
            out.push(' ');
        }
        out.push_str(t);
        last = Some(kind);
    }
    out
}
