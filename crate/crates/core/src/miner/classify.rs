use std::collections::BTreeSet;
use std::ops::Range;

use similar::{capture_diff_slices, Algorithm, DiffOp};

use super::pairs::EditType;
use crate::latex::token_texts;
use crate::markup::{math_regions, MathRegion};

const IMAGE_EXTENSIONS: &[&str] = &[".png", ".jpg", ".jpeg", ".gif", ".bmp", ".tiff"];

/// Image links (markdown targets, `<img src>` or bare URLs) of a text.
pub fn image_links(text: &str) -> Vec<String> {
    let mut links = Vec::new();
    for chunk in text.split(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '"' | '\'' | '<' | '>')) {
        let chunk = chunk.trim_start_matches("src=");
        let path = chunk.split(['?', '#']).next().unwrap_or("");
        let lower = path.to_ascii_lowercase();
        if IMAGE_EXTENSIONS.iter().any(|ext| lower.ends_with(ext) && lower.len() > ext.len()) {
            links.push(chunk.to_string());
        }
    }
    links
}

struct Chars {
    /// byte offset of each char, plus the total length
    offsets: Vec<usize>,
    chars: Vec<char>,
}

impl Chars {
    fn new(text: &str) -> Self {
        let mut offsets: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        offsets.push(text.len());
        Chars { offsets, chars: text.chars().collect() }
    }

    fn char_range(&self, bytes: &Range<usize>) -> Range<usize> {
        let start = self.offsets.partition_point(|&o| o < bytes.start);
        let end = self.offsets.partition_point(|&o| o < bytes.end);
        start..end
    }
}

/// For every char of `edited`, the index of the char of `original` it was
/// carried over from, if any.
fn carried_from(original: &Chars, edited: &Chars) -> Vec<Option<usize>> {
    let mut map = vec![None; edited.chars.len()];
    for op in capture_diff_slices(Algorithm::Myers, &original.chars, &edited.chars) {
        if let DiffOp::Equal { old_index, new_index, len } = op {
            for k in 0..len {
                map[new_index + k] = Some(old_index + k);
            }
        }
    }
    map
}

/// Byte spans of `links` in `text`, widened to the whole markdown image
/// (`![alt](link)`) when the link sits inside one.
fn link_spans(text: &str, links: &[String]) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    for link in links {
        for (at, _) in text.match_indices(link.as_str()) {
            let mut span = at..at + link.len();
            if text[..at].ends_with("](") {
                if let Some(open) = text[..at].rfind("![") {
                    span.start = open;
                }
                if text[span.end..].starts_with(')') {
                    span.end += 1;
                }
            }
            spans.push(span);
        }
    }
    spans
}

fn region_of(regions: &[Range<usize>], at: usize) -> Option<usize> {
    regions.iter().position(|r| r.contains(&at))
}

/// Char positions of the inner text that are not part of a command name.
fn plain_positions(text: &str, inner: Range<usize>) -> Vec<usize> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = inner.start;
    while i < inner.end {
        if chars[i] == '\\' {
            i += 1;
            while i < inner.end && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            continue;
        }
        if chars[i].is_alphanumeric() {
            out.push(i);
        }
        i += 1;
    }
    out
}

/// Edit types of an aligned pair. A pair may carry several types.
pub fn classify_edit(original: &str, edited: &str) -> BTreeSet<EditType> {
    let mut types = BTreeSet::new();
    let o_chars = Chars::new(original);
    let e_chars = Chars::new(edited);
    let o_regions: Vec<MathRegion> = math_regions(original).into_iter().filter(|r| r.closed).collect();
    let e_regions: Vec<MathRegion> = math_regions(edited).into_iter().filter(|r| r.closed).collect();
    let o_outer: Vec<Range<usize>> = o_regions.iter().map(|r| o_chars.char_range(&r.outer)).collect();
    let carried = carried_from(&o_chars, &e_chars);

    let removed_links: Vec<String> = {
        let kept = image_links(edited);
        image_links(original).into_iter().filter(|l| !kept.contains(l)).collect()
    };
    if !removed_links.is_empty() && !e_regions.is_empty() {
        types.insert(EditType::ScreenshotTranscription);
    }
    // text of a replaced image is not prose that got latexified
    let o_links: Vec<Range<usize>> = link_spans(original, &removed_links).iter().map(|r| o_chars.char_range(r)).collect();

    for region in &e_regions {
        let outer = e_chars.char_range(&region.outer);
        let inner = e_chars.char_range(&region.inner);

        // original math regions sharing at least one carried char
        let partners: BTreeSet<usize> =
            outer.clone().filter_map(|i| carried[i]).filter_map(|o| region_of(&o_outer, o)).collect();
        for &p in &partners {
            let before = &original[o_regions[p].inner.clone()];
            let after = &edited[region.inner.clone()];
            if token_texts(before) != token_texts(after) {
                types.insert(EditType::LatexRevision);
            }
        }

        let from_prose =
            |i: &usize| carried[*i].is_some_and(|o| region_of(&o_outer, o).is_none() && region_of(&o_links, o).is_none());
        let plain = plain_positions(edited, inner.clone());
        let latexified = if plain.is_empty() {
            inner.clone().filter(|&i| e_chars.chars[i].is_alphanumeric()).any(|i| from_prose(&i))
        } else {
            2 * plain.iter().filter(|i| from_prose(i)).count() >= plain.len()
        };
        if latexified {
            types.insert(EditType::Latexification);
        }
    }

    if types.is_empty() {
        types.insert(EditType::Other);
    }
    types
}
