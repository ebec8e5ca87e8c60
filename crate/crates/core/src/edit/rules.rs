use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, Algorithm, DiffOp};

use super::tokens::{edit_tokens, EditKind};
use crate::jsonl::{read_jsonl, write_jsonl, JsonlError};
use crate::miner::{EditType, SentencePair};
use crate::normalize::{is_placeholder, normalize};

pub const DEFAULT_MIN_SUPPORT: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EditRule {
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
    pub support: u64,
    #[serde(default)]
    pub context_left: Option<String>,
    #[serde(default)]
    pub context_right: Option<String>,
}

impl EditRule {
    /// A lone one-character token is too ambiguous to rewrite without
    /// context.
    pub fn is_ambiguous(lhs: &[String]) -> bool {
        lhs.len() == 1 && lhs[0].chars().count() == 1
    }
}

pub fn read_rules<R: BufRead>(input: R) -> Result<Vec<EditRule>, JsonlError> {
    read_jsonl(input)
}

pub fn write_rules<W: Write>(out: W, rules: &[EditRule]) -> Result<(), JsonlError> {
    write_jsonl(out, rules)
}

/// Rewrite-relevant tokens of a sentence: dollars are left to the wrapper.
fn rule_tokens(sentence: &str) -> Vec<String> {
    edit_tokens(&normalize(sentence).template)
        .into_iter()
        .filter(|t| t.kind != EditKind::Dollar)
        .map(|t| t.text)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Hunk {
    old: std::ops::Range<usize>,
    new: std::ops::Range<usize>,
}

fn hunks(old: &[String], new: &[String]) -> Vec<Hunk> {
    let mut out: Vec<Hunk> = Vec::new();
    for op in capture_diff_slices(Algorithm::Myers, old, new) {
        let (o, n) = match op {
            DiffOp::Equal { .. } => continue,
            DiffOp::Delete { old_index, old_len, new_index } => (old_index..old_index + old_len, new_index..new_index),
            DiffOp::Insert { old_index, new_index, new_len } => (old_index..old_index, new_index..new_index + new_len),
            DiffOp::Replace { old_index, old_len, new_index, new_len } => {
                (old_index..old_index + old_len, new_index..new_index + new_len)
            }
        };
        match out.last_mut() {
            Some(last) if last.old.end == o.start && last.new.end == n.start => {
                last.old.end = o.end;
                last.new.end = n.end;
            }
            _ => out.push(Hunk { old: o, new: n }),
        }
    }
    out
}

/// Pure insertions cannot be matched; attach them to a neighbouring hunk
/// when at most one unchanged token sits in between.
fn merge_insertions(mut hs: Vec<Hunk>) -> Vec<Hunk> {
    let mut i = 0;
    while i < hs.len() {
        if hs[i].old.is_empty() {
            let gap_prev = (i > 0).then(|| hs[i].old.start - hs[i - 1].old.end);
            let gap_next = hs.get(i + 1).map(|h| h.old.start - hs[i].old.end);
            if gap_prev.is_some_and(|g| g <= 1) {
                let cur = hs.remove(i);
                hs[i - 1].old.end = cur.old.end;
                hs[i - 1].new.end = cur.new.end;
                continue;
            }
            if gap_next.is_some_and(|g| g <= 1) {
                let cur = hs.remove(i);
                hs[i].old.start = cur.old.start;
                hs[i].new.start = cur.new.start;
                continue;
            }
        }
        i += 1;
    }
    hs
}

type RuleKey = (Vec<String>, Vec<String>, Option<String>, Option<String>);

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

fn pair_occurrences(pair: &SentencePair) -> Vec<RuleKey> {
    let old = rule_tokens(&pair.original);
    let new = rule_tokens(&pair.edited);
    let mut keys = Vec::new();
    for h in merge_insertions(hunks(&old, &new)) {
        let lhs = &old[h.old.clone()];
        let rhs = &new[h.new.clone()];
        // equal-length replacements are independent substitutions
        let parts: Vec<(usize, &[String], &[String])> = if lhs.len() == rhs.len() && lhs.len() > 1 {
            (0..lhs.len()).map(|k| (h.old.start + k, &lhs[k..k + 1], &rhs[k..k + 1])).collect()
        } else {
            vec![(h.old.start, lhs, rhs)]
        };
        for (at, l, r) in parts {
            if l.is_empty() || l == r || l.iter().any(|t| is_placeholder(t)) || contains_run(r, l) {
                continue;
            }
            if EditRule::is_ambiguous(l) {
                let left = at.checked_sub(1).map(|k| old[k].clone());
                let right = old.get(at + l.len()).cloned();
                if left.is_some() {
                    keys.push((l.to_vec(), r.to_vec(), left, None));
                }
                if right.is_some() {
                    keys.push((l.to_vec(), r.to_vec(), None, right));
                }
            } else {
                keys.push((l.to_vec(), r.to_vec(), None, None));
            }
        }
    }
    keys
}

/// Token substitution rules observed at least `min_support` times, ordered
/// by support and then lhs length, both descending.
///
/// Pairs that replace an image carry no textual rewrite and are skipped.
/// Substitutions seen in both directions contradict each other and are
/// dropped.
pub fn mine_rules(pairs: &[SentencePair], min_support: u64) -> Vec<EditRule> {
    let counts: BTreeMap<RuleKey, u64> = pairs
        .par_iter()
        .filter(|p| !p.edit_types.contains(&EditType::ScreenshotTranscription))
        .map(|p| {
            let mut m = BTreeMap::new();
            for k in pair_occurrences(p) {
                *m.entry(k).or_insert(0u64) += 1;
            }
            m
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let directions: BTreeSet<(&[String], &[String])> = counts.keys().map(|k| (k.0.as_slice(), k.1.as_slice())).collect();
    let contradicted: BTreeSet<(Vec<String>, Vec<String>)> = directions
        .iter()
        .filter(|(l, r)| directions.contains(&(*r, *l)))
        .map(|(l, r)| (l.to_vec(), r.to_vec()))
        .collect();
    let mut rules: Vec<EditRule> = counts
        .into_iter()
        .filter(|(k, _)| !contradicted.contains(&(k.0.clone(), k.1.clone())))
        .filter(|&(_, support)| support >= min_support.max(1))
        .map(|((lhs, rhs, context_left, context_right), support)| EditRule {
            lhs,
            rhs,
            support,
            context_left,
            context_right,
        })
        .collect();
    rules.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(b.lhs.len().cmp(&a.lhs.len()))
            .then_with(|| (&a.lhs, &a.rhs, &a.context_left, &a.context_right).cmp(&(&b.lhs, &b.rhs, &b.context_left, &b.context_right)))
    });
    rules
}
