use crate::markup::{math_regions, MathDelimiter};

/// `. . .` (two or more spaced dots) becomes `...`.
fn collapse_dots(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(at) = rest.find(". .") {
        out.push_str(&rest[..at]);
        let mut end = at + 1;
        while rest[end..].starts_with(" .") {
            end += 2;
        }
        out.push_str("...");
        rest = &rest[end..];
    }
    out.push_str(rest);
    out
}

const TRAILING: &[char] = &['.', ',', ';', ':', '?', '!', ' ', '\t', '\n', '\r'];

/// One repair of the first unclosed math region, if there is one.
fn repair_dollars_once(s: &str) -> Option<String> {
    let region = math_regions(s).into_iter().find(|r| !r.closed)?;
    let inner = &s[region.inner.clone()];
    let mut out = s.to_string();
    if inner.trim().is_empty() {
        // stray delimiter
        out.replace_range(region.outer.start..region.inner.start, "");
    } else if region.delimiter == MathDelimiter::Display && math_regions(&s[region.outer.start + 1..]).first().is_some_and(|r| r.closed) {
        // `$$x$` meant `$x$`
        out.replace_range(region.outer.start..region.outer.start + 1, "");
    } else {
        let closer = match region.delimiter {
            MathDelimiter::Display => "$$",
            _ => "$",
        };
        let end = region.outer.start + s[region.outer.clone()].trim_end_matches(TRAILING).len();
        let end = end.max(region.inner.start + 1);
        out.insert_str(end, closer);
    }
    Some(out)
}

fn balance_braces(s: &str) -> String {
    let mut edits: Vec<(usize, usize, String)> = Vec::new();
    for region in math_regions(s).into_iter().filter(|r| r.closed) {
        let inner = &s[region.inner.clone()];
        let bytes = inner.as_bytes();
        let mut depth = 0usize;
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'\\' => {
                    i += 2;
                    continue;
                }
                b'{' => depth += 1,
                b'}' if depth == 0 => edits.push((region.inner.start + i, region.inner.start + i + 1, String::new())),
                b'}' => depth -= 1,
                _ => {}
            }
            i += 1;
        }
        if depth > 0 {
            let trimmed = inner.trim_end();
            let escaped = trimmed.len() - trimmed.trim_end_matches('\\').len();
            let at = region.inner.start + if escaped % 2 == 1 { inner.len() } else { trimmed.len() };
            edits.push((at, at, "}".repeat(depth)));
        }
    }
    let mut out = s.to_string();
    edits.sort_by_key(|e| std::cmp::Reverse(e.0));
    for (start, end, text) in edits {
        out.replace_range(start..end, &text);
    }
    out
}

/// Clean up a candidate sentence: spaced-dot runs and stray or duplicated
/// dollars are collapsed, unclosed math is closed and braces inside math
/// are balanced. Balanced input comes back unchanged.
pub fn postprocess(sentence: &str) -> String {
    let mut s = sentence.to_string();
    // a repair can expose another one, so run to a fixed point
    for _ in 0..8 {
        let mut next = collapse_dots(&s);
        for _ in 0..16 {
            match repair_dollars_once(&next) {
                Some(repaired) => next = repaired,
                None => break,
            }
        }
        let next = balance_braces(&next);
        if next == s {
            break;
        }
        s = next;
    }
    s
}
