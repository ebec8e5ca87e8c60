//! Locating math regions (`$..$`, `$$..$$`, `\begin{equation}..`) in post
//! bodies.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathDelimiter {
    Inline,
    Display,
    Environment,
}

/// A math region. `outer` includes the delimiters, `inner` is the formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MathRegion {
    pub outer: Range<usize>,
    pub inner: Range<usize>,
    pub delimiter: MathDelimiter,
    /// False when the closing delimiter was never found.
    pub closed: bool,
}

const MATH_ENVIRONMENTS: &[&str] = &[
    "equation", "equation*", "align", "align*", "gather", "gather*", "eqnarray", "eqnarray*",
    "multline", "multline*", "displaymath",
];

/// Byte offset of the next blank line (two newlines separated only by
/// whitespace) at or after `from`.
pub fn next_blank_line(text: &str, from: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut i = from;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            let mut j = i + 1;
            while j < bytes.len() && matches!(bytes[j], b' ' | b'\t' | b'\r') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                return Some(i);
            }
        }
        i += 1;
    }
    None
}

/// Find an unescaped `needle` starting at `from`, not crossing `limit`.
fn find_delim(text: &str, from: usize, limit: usize, needle: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut i = from;
    while i + needle.len() <= limit {
        if bytes[i] == b'\\' {
            i += 2;
            continue;
        }
        if bytes[i..].starts_with(needle.as_bytes()) {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn environment_at(text: &str, at: usize) -> Option<(&'static str, usize)> {
    let rest = text[at..].strip_prefix("\\begin{")?;
    MATH_ENVIRONMENTS.iter().find_map(|env| {
        rest.strip_prefix(env)
            .and_then(|r| r.strip_prefix('}'))
            .map(|_| (*env, at + "\\begin{".len() + env.len() + 1))
    })
}

/// All math regions of `text` in document order.
///
/// `\$` is an escaped dollar, not a delimiter. An inline region never
/// crosses a blank line; an unclosed region runs to that blank line (or the
/// end of the text) and is flagged `closed: false`.
pub fn math_regions(text: &str) -> Vec<MathRegion> {
    let bytes = text.as_bytes();
    let mut regions = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => {
                if let Some((env, body_start)) = environment_at(text, i) {
                    let end_tag = format!("\\end{{{env}}}");
                    let region = match text[body_start..].find(&end_tag) {
                        Some(off) => MathRegion {
                            outer: i..body_start + off + end_tag.len(),
                            inner: body_start..body_start + off,
                            delimiter: MathDelimiter::Environment,
                            closed: true,
                        },
                        None => MathRegion {
                            outer: i..text.len(),
                            inner: body_start..text.len(),
                            delimiter: MathDelimiter::Environment,
                            closed: false,
                        },
                    };
                    i = region.outer.end;
                    regions.push(region);
                } else {
                    i += 2;
                }
            }
            b'$' => {
                let display = bytes.get(i + 1) == Some(&b'$');
                let (delim, open_len) = if display { ("$$", 2) } else { ("$", 1) };
                let start = i + open_len;
                let limit = next_blank_line(text, start).unwrap_or(text.len());
                let region = match find_delim(text, start, limit, delim) {
                    Some(close) => MathRegion {
                        outer: i..close + open_len,
                        inner: start..close,
                        delimiter: if display { MathDelimiter::Display } else { MathDelimiter::Inline },
                        closed: true,
                    },
                    None => MathRegion {
                        outer: i..limit,
                        inner: start..limit,
                        delimiter: if display { MathDelimiter::Display } else { MathDelimiter::Inline },
                        closed: false,
                    },
                };
                i = region.outer.end.max(i + 1);
                regions.push(region);
            }
            _ => i += 1,
        }
    }
    regions
}

/// True if `at` lies strictly inside one of `regions`.
pub fn inside_any(regions: &[MathRegion], at: usize) -> bool {
    regions.iter().any(|r| r.outer.start < at && at < r.outer.end)
}

/// `text` with every math region removed.
pub fn strip_math(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for r in math_regions(text) {
        out.push_str(&text[last..r.outer.start]);
        last = r.outer.end;
    }
    out.push_str(&text[last..]);
    out
}

/// Contents of the closed math regions, with a wrapping equation
/// environment inside `$..$` unwrapped.
pub fn formula_contents(text: &str) -> Vec<&str> {
    math_regions(text)
        .into_iter()
        .filter(|r| r.closed)
        .map(|r| {
            let inner = text[r.inner.clone()].trim();
            if r.delimiter != MathDelimiter::Environment {
                if let Some(nested) = math_regions(inner).first() {
                    if nested.delimiter == MathDelimiter::Environment
                        && nested.closed
                        && nested.outer == (0..inner.len())
                    {
                        return inner[nested.inner.clone()].trim();
                    }
                }
            }
            inner
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_display() {
        let t = "a $x$ b $$y$$ c";
        let r = math_regions(t);
        assert_eq!(r.len(), 2);
        assert_eq!(&t[r[0].inner.clone()], "x");
        assert_eq!(r[1].delimiter, MathDelimiter::Display);
        assert_eq!(&t[r[1].inner.clone()], "y");
    }

    #[test]
    fn escaped_dollar_is_text() {
        assert!(math_regions(r"costs \$5 and \$6").is_empty());
    }

    #[test]
    fn equation_environment() {
        let t = r"see \begin{equation}a=b\end{equation} ok";
        let r = math_regions(t);
        assert_eq!(&t[r[0].inner.clone()], "a=b");
        assert_eq!(r[0].delimiter, MathDelimiter::Environment);
    }

    #[test]
    fn unclosed_inline_stops_at_blank_line() {
        let t = "a $x\n\nb $y$";
        let r = math_regions(t);
        assert!(!r[0].closed);
        assert_eq!(&t[r[0].inner.clone()], "x");
        assert!(r[1].closed);
    }

    #[test]
    fn nested_environment_is_unwrapped() {
        let t = r"$\begin{equation}a=1\end{equation}$";
        assert_eq!(formula_contents(t), ["a=1"]);
    }

    #[test]
    fn strip_removes_regions() {
        assert_eq!(strip_math("a $x$ b"), "a  b");
    }
}
