use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::rules::EditRule;
use super::tokens::{edit_tokens, kind_of, needs_space, EditKind};
use crate::markup::math_regions;
use crate::miner::levenshtein;
use crate::normalize::detect::{classify, has_operator_char, trim_punct, QUOTES};
use crate::normalize::{number_placeholder_index, CommandWords, SpanReason, WordToken, word_tokens};

pub const MAX_CANDIDATES: usize = 5;
const MAX_PASSES: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    Rules,
    #[default]
    Adapter,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    pub score: f64,
    #[serde(default)]
    pub source: CandidateSource,
}

/// A stretch of the sentence that rules may rewrite.
#[derive(Debug, Clone, PartialEq)]
struct Area {
    range: Range<usize>,
    /// Not yet inside dollars; gets wrapped if a rule fires or it is
    /// `eligible`.
    bare: bool,
    /// Bytes replaced by the wrapped form (includes swapped quotes).
    wrap_range: Range<usize>,
    eligible: bool,
}

const ARITHMETIC: &[char] = &['+', '-', '−', '=', '*', '/', '^', '_', '<', '>', '\\', '|'];

fn is_number_token(text: &str) -> bool {
    let core = trim_punct(text);
    number_placeholder_index(core).is_some()
        || (!core.is_empty()
            && core.bytes().all(|b| b.is_ascii_digit() || b == b'.')
            && core.as_bytes()[0].is_ascii_digit()
            && !core.ends_with('.'))
}

fn is_variable(text: &str) -> bool {
    let core = trim_punct(text);
    core.len() == 1 && core.bytes().all(|b| b.is_ascii_alphabetic()) && !matches!(core, "a" | "A" | "I")
}

fn bare_area(run: &[WordToken], after_prose: bool) -> Option<Area> {
    let texts: Vec<&str> = run.iter().map(|t| t.text).collect();
    if after_prose && (texts == ["(", "s", ")"] || texts == ["(s)"]) {
        return None;
    }
    if texts.iter().any(|t| t.contains('$')) {
        return None;
    }
    let quoted = run.len() >= 3 && QUOTES.contains(&texts[0]) && texts[0] == texts[run.len() - 1];
    let mut core = if quoted { &run[1..run.len() - 1] } else { run };
    if !quoted {
        while !core.is_empty() && is_number_token(core[0].text) && !core.get(1).is_some_and(|t| has_operator_char(t.text)) {
            core = &core[1..];
        }
        while let [.., before, last] = core {
            if is_number_token(last.text) && !has_operator_char(before.text) {
                core = &core[..core.len() - 1];
            } else {
                break;
            }
        }
        if let [only] = core {
            if is_number_token(only.text) {
                return None;
            }
        }
    }
    // trailing sentence punctuation stays outside
    while let Some(last) = core.last() {
        if trim_punct(last.text).is_empty() {
            core = &core[..core.len() - 1];
        } else {
            break;
        }
    }
    let (first, last) = (core.first()?, core.last()?);
    let range = first.range.start..last.range.start + trim_punct(last.text).len();
    let wrap_range = if quoted { run[0].range.start..run[run.len() - 1].range.end } else { range.clone() };
    let has_alnum = core.iter().any(|t| t.text.chars().any(|c| c.is_ascii_alphanumeric()));
    let eligible = has_alnum && core.iter().any(|t| t.text.contains(ARITHMETIC) || is_variable(t.text));
    Some(Area { range, bare: true, wrap_range, eligible })
}

fn find_areas(sentence: &str) -> Vec<Area> {
    let mut areas: Vec<Area> = math_regions(sentence)
        .into_iter()
        .filter(|r| r.closed)
        .map(|r| Area { range: r.inner, bare: false, wrap_range: r.outer, eligible: false })
        .collect();
    let words = word_tokens(sentence);
    let reasons = classify(sentence, &words, true, CommandWords::builtin());
    let is_bare = |r: Option<SpanReason>| r.is_some_and(|r| r != SpanReason::DollarDelimited);
    let mut i = 0;
    while i < words.len() {
        if !is_bare(reasons[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < words.len() && is_bare(reasons[j + 1]) {
            j += 1;
        }
        let after_prose = i > 0 && reasons[i - 1].is_none();
        areas.extend(bare_area(&words[i..=j], after_prose));
        i = j + 1;
    }
    areas.sort_by_key(|a| a.range.start);
    areas
}

#[derive(Debug, Clone)]
struct Tok {
    text: String,
    kind: EditKind,
    /// Whitespace written before the token.
    gap: String,
}

fn area_tokens(text: &str) -> (Vec<Tok>, String) {
    let mut out = Vec::new();
    let mut last = 0;
    for t in edit_tokens(text) {
        out.push(Tok { gap: text[last..t.range.start].to_string(), text: t.text, kind: t.kind });
        last = t.range.end;
    }
    (out, text[last..].to_string())
}

fn render(tokens: &[Tok], compact: bool) -> String {
    let mut out = String::new();
    let mut prev: Option<EditKind> = None;
    for t in tokens {
        let gap = if compact { "" } else { t.gap.as_str() };
        if gap.is_empty() && prev.is_some_and(|p| needs_space(p, t.kind)) {
            out.push(' ');
        } else {
            out.push_str(gap);
        }
        out.push_str(&t.text);
        prev = Some(t.kind);
    }
    out
}

/// Apply rules to a token list until nothing matches. Returns the indices
/// (into `rules`) of every application.
fn rewrite(tokens: &mut Vec<Tok>, left: Option<&str>, right: Option<&str>, rules: &[&EditRule], order: &[usize]) -> Vec<usize> {
    let mut applied = Vec::new();
    for _ in 0..MAX_PASSES {
        let n = tokens.len();
        let mut claimed = vec![false; n];
        let mut matches: Vec<(usize, usize)> = Vec::new();
        for &ri in order {
            let rule = rules[ri];
            let l = rule.lhs.len();
            if l == 0 || l > n {
                continue;
            }
            let mut i = 0;
            while i + l <= n {
                let free = !claimed[i..i + l].iter().any(|&c| c);
                let same = free && tokens[i..i + l].iter().zip(&rule.lhs).all(|(t, w)| &t.text == w);
                let before = if i == 0 { left } else { Some(tokens[i - 1].text.as_str()) };
                let after = if i + l == n { right } else { Some(tokens[i + l].text.as_str()) };
                let context = rule.context_left.as_deref().is_none_or(|c| before == Some(c))
                    && rule.context_right.as_deref().is_none_or(|c| after == Some(c));
                if same && context {
                    claimed[i..i + l].iter_mut().for_each(|c| *c = true);
                    matches.push((i, ri));
                    i += l;
                } else {
                    i += 1;
                }
            }
        }
        if matches.is_empty() {
            break;
        }
        matches.sort_by_key(|m| std::cmp::Reverse(m.0));
        for (i, ri) in matches {
            let rule = rules[ri];
            let gap = tokens[i].gap.clone();
            let replacement: Vec<Tok> = rule
                .rhs
                .iter()
                .enumerate()
                .map(|(k, text)| Tok {
                    text: text.clone(),
                    kind: kind_of(text),
                    gap: if k == 0 { gap.clone() } else { String::new() },
                })
                .collect();
            tokens.splice(i..i + rule.lhs.len(), replacement);
            applied.push(ri);
        }
    }
    applied
}

struct Outcome {
    text: String,
    support: u64,
    applied: BTreeSet<usize>,
}

fn run(sentence: &str, areas: &[Area], rules: &[&EditRule], order: &[usize]) -> Outcome {
    let context_tokens: Vec<_> = edit_tokens(sentence).into_iter().filter(|t| t.kind != EditKind::Dollar).collect();
    let mut edits: Vec<(Range<usize>, String)> = Vec::new();
    let mut support = 0;
    let mut applied = BTreeSet::new();
    for area in areas {
        let left = context_tokens.iter().rev().find(|t| t.range.end <= area.range.start).map(|t| t.text.as_str());
        let right = context_tokens.iter().find(|t| t.range.start >= area.range.end).map(|t| t.text.as_str());
        let (mut tokens, tail) = area_tokens(&sentence[area.range.clone()]);
        let fired = rewrite(&mut tokens, left, right, rules, order);
        support += fired.iter().map(|&ri| rules[ri].support).sum::<u64>();
        applied.extend(fired.iter().copied());
        match (area.bare, fired.is_empty()) {
            (false, true) => {}
            (false, false) => edits.push((area.range.clone(), render(&tokens, false) + &tail)),
            (true, false) => edits.push((area.wrap_range.clone(), format!("${}$", render(&tokens, true)))),
            (true, true) if area.eligible => {
                edits.push((area.wrap_range.clone(), format!("$ {} $", &sentence[area.range.clone()])))
            }
            (true, true) => {}
        }
    }
    let mut text = sentence.to_string();
    for (range, replacement) in edits.into_iter().rev() {
        text.replace_range(range, &replacement);
    }
    Outcome { text, support, applied }
}

/// Candidate rewrites of a (normalized) sentence, best first.
///
/// Rules rewrite math stretches, longest lhs first and leftmost first;
/// bare math that a rule touched, or that looks like a formula, is wrapped
/// in dollars. Variants drop one applied rule at a time. Candidates are
/// ordered by the total support of the rules they used, then by closeness
/// to the input.
pub fn apply_rules(sentence: &str, rules: &[EditRule]) -> Vec<Candidate> {
    let areas = find_areas(sentence);
    let all: Vec<&EditRule> = rules.iter().collect();
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| all[b].lhs.len().cmp(&all[a].lhs.len()).then(all[b].support.cmp(&all[a].support)).then(a.cmp(&b)));

    let full = run(sentence, &areas, &all, &order);
    let mut outcomes = vec![run(sentence, &areas, &all, &[])];
    for &skip in &full.applied {
        let without: Vec<usize> = order.iter().copied().filter(|&i| i != skip).collect();
        outcomes.push(run(sentence, &areas, &all, &without));
    }
    outcomes.insert(0, full);

    let mut candidates: Vec<(Candidate, usize)> = Vec::new();
    for o in outcomes {
        if o.text == sentence || candidates.iter().any(|(c, _)| c.text == o.text) {
            continue;
        }
        let distance = levenshtein(&o.text, sentence);
        candidates.push((Candidate { text: o.text, score: o.support as f64, source: CandidateSource::Rules }, distance));
    }
    candidates.sort_by(|a, b| b.0.score.total_cmp(&a.0.score).then(a.1.cmp(&b.1)).then_with(|| a.0.text.cmp(&b.0.text)));
    candidates.into_iter().take(MAX_CANDIDATES).map(|(c, _)| c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(lhs: &[&str], rhs: &[&str], support: u64) -> EditRule {
        EditRule {
            lhs: lhs.iter().map(|s| s.to_string()).collect(),
            rhs: rhs.iter().map(|s| s.to_string()).collect(),
            support,
            context_left: None,
            context_right: None,
        }
    }

    fn best(sentence: &str, rules: &[EditRule]) -> Option<String> {
        apply_rules(sentence, rules).into_iter().next().map(|c| c.text)
    }

    #[test]
    fn wraps_formula_and_variable() {
        assert_eq!(
            best("formula: y + py = px - 2p for which value ( s ) of p 1", &[]).unwrap(),
            "formula: $ y + py = px - 2p $ for which value ( s ) of $ p $ 1"
        );
    }

    #[test]
    fn rule_fired_span_is_compact() {
        let rules = [rule(&["root", "2"], &[r"\sqrt", "{", "2", "}"], 3)];
        assert_eq!(best("x - root2", &rules).unwrap(), r"$x-\sqrt{2}$");
    }

    #[test]
    fn quoted_variable() {
        assert_eq!(best("' i ' is part of the ratio", &[]).unwrap(), "$ i $ is part of the ratio");
    }

    #[test]
    fn inside_dollars_is_in_place() {
        let mut star = rule(&["*"], &[r"\cdot"], 3);
        star.context_right = Some("log".into());
        let rules = [rule(&["log"], &[r"\log"], 3), star];
        assert_eq!(
            best("can some one explain $ f ( n ) = 10 * log ( n ) $", &rules).unwrap(),
            r"can some one explain $ f ( n ) = 10 \cdot \log ( n ) $"
        );
    }

    #[test]
    fn context_is_required() {
        let mut star = rule(&["*"], &[r"\cdot"], 3);
        star.context_right = Some("log".into());
        assert!(apply_rules("so $ 2 * 3 $ here", &[star]).is_empty());
    }

    #[test]
    fn nothing_to_do() {
        assert!(apply_rules("just some words here", &[rule(&["root"], &[r"\sqrt"], 9)]).is_empty());
        assert!(apply_rules("I have 3 apples", &[]).is_empty());
    }

    #[test]
    fn placeholders_untouched() {
        let rules = [rule(&["COMMON_WORDS"], &["x"], 9)];
        assert!(apply_rules("COMMON_WORDS", &rules).is_empty());
    }

    #[test]
    fn variants_ordered_by_support() {
        let rules = [rule(&["root"], &[r"\sqrt"], 5), rule(&["log"], &[r"\log"], 3)];
        let c = apply_rules("$ root ( log ( x ) ) $", &rules);
        assert_eq!(c[0].text, r"$ \sqrt ( \log ( x ) ) $");
        assert_eq!(c[0].score, 8.0);
        assert_eq!(c[1].score, 5.0);
        assert_eq!(c[2].score, 3.0);
    }

    #[test]
    fn second_application_is_a_fixed_point() {
        let rules = [rule(&["root", "2"], &[r"\sqrt", "{", "2", "}"], 3)];
        for s in ["x - root2", "formula: y + py = px - 2p for which value ( s ) of p 1", "' i ' is part of the ratio"] {
            let once = best(s, &rules).unwrap();
            assert_eq!(best(&once, &rules), None, "{once}");
        }
    }
}
