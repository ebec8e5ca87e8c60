use crate::latex::{canonical_tokens, parse, token_texts, tokenize, TokenKind};
use crate::markup::formula_contents;

pub const MIN_FORMULA_CHARS: usize = 10;
pub const MAX_FORMULA_CHARS: usize = 256;

/// True if the formula holds an operator, a script marker or a command.
pub fn has_math_character(formula: &str) -> bool {
    tokenize(formula).iter().any(|t| match t.kind {
        TokenKind::Command | TokenKind::Subscript | TokenKind::Superscript => true,
        TokenKind::Operator => matches!(t.text.as_str(), "+" | "-" | "=" | "*" | "/" | "<" | ">" | "|" | "!"),
        _ => false,
    })
}

/// Formulas of a post body in document order, after the noise filters:
/// at least one math character, no duplicates, length within bounds.
pub fn extract_formulas(body: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in formula_contents(body) {
        let len = f.chars().count();
        if !(MIN_FORMULA_CHARS..=MAX_FORMULA_CHARS).contains(&len) || !has_math_character(f) {
            continue;
        }
        if !out.iter().any(|seen| seen == f) {
            out.push(f.to_string());
        }
    }
    out
}

/// Canonical token sequence of each formula in a sentence.
pub fn formula_signature(text: &str) -> Vec<Vec<String>> {
    formula_contents(text)
        .into_iter()
        .map(|f| match parse(&tokenize(f)) {
            // a repaired formula must not look equal to its repair
            Ok(parsed) if parsed.diagnostics.is_empty() => canonical_tokens(f),
            _ => token_texts(f),
        })
        .collect()
}

/// Whether the formula content of two sentences differs after
/// canonicalization.
pub fn formulas_differ(original: &str, edited: &str) -> bool {
    formula_signature(original) != formula_signature(edited)
}
