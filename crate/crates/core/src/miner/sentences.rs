use std::ops::Range;

use crate::markup::{math_regions, next_blank_line};

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

/// Byte ranges of the sentences of `body`, trimmed and in order.
///
/// A sentence ends after a run of `.`, `?` or `!` that is followed by
/// whitespace or the end of the body (unless an operator follows, as in
/// `n! > 1`), or at a blank line. Punctuation inside
/// a math region never ends a sentence.
pub fn sentence_spans(body: &str) -> Vec<Range<usize>> {
    let regions = math_regions(body);
    let mut cuts = Vec::new();
    let mut region_iter = regions.iter().peekable();
    let mut chars = body.char_indices().peekable();

    while let Some((i, c)) = chars.next() {
        while region_iter.peek().is_some_and(|r| r.outer.end <= i) {
            region_iter.next();
        }
        if let Some(r) = region_iter.peek() {
            if r.outer.start <= i && i < r.outer.end {
                // jump past the region
                while chars.peek().is_some_and(|&(j, _)| j < r.outer.end) {
                    chars.next();
                }
                continue;
            }
        }
        if c == '\n' && next_blank_line(body, i) == Some(i) {
            cuts.push(i);
            continue;
        }
        if is_terminal(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, n)) = chars.peek() {
                if is_terminal(n) {
                    end = j + n.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            // `n! > 2^n`: an operator after the gap continues the expression
            let continues = body[end..].trim_start().starts_with(['=', '<', '>', '+', '*', '/', '^']);
            let at_boundary = match chars.peek() {
                None => true,
                Some(&(_, n)) => n.is_whitespace() && !continues,
            };
            if at_boundary {
                cuts.push(end);
            }
        }
    }

    let mut spans = Vec::new();
    let mut start = 0;
    for cut in cuts.into_iter().chain(std::iter::once(body.len())) {
        if let Some(span) = trim_span(body, start..cut) {
            spans.push(span);
        }
        start = cut;
    }
    spans
}

fn trim_span(body: &str, range: Range<usize>) -> Option<Range<usize>> {
    let slice = &body[range.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if trimmed.is_empty() {
        return None;
    }
    let start = range.start + lead;
    Some(start..start + trimmed.len())
}

/// Split a post body into sentences; each keeps its terminal punctuation.
pub fn split_sentences(body: &str) -> Vec<String> {
    sentence_spans(body).into_iter().map(|r| body[r].to_string()).collect()
}
