use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::distance::text_similarity;
use super::formulas::formulas_differ;
use crate::markup::math_regions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditType {
    Latexification,
    LatexRevision,
    ScreenshotTranscription,
    Other,
}

impl EditType {
    pub const ALL: [EditType; 4] = [
        EditType::Latexification,
        EditType::LatexRevision,
        EditType::ScreenshotTranscription,
        EditType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EditType::Latexification => "latexification",
            EditType::LatexRevision => "latex_revision",
            EditType::ScreenshotTranscription => "screenshot_transcription",
            EditType::Other => "other",
        }
    }
}

/// An aligned original/edited sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub original: String,
    pub edited: String,
    pub similarity: f64,
    pub post_id: u64,
    #[serde(default)]
    pub edit_types: BTreeSet<EditType>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinerConfig {
    pub align_threshold: f64,
    pub min_chars: usize,
    pub max_chars: usize,
    pub phrase_theta: u64,
    pub phrase_score_threshold: f64,
    /// Drop edits that produce a rollback revision.
    pub skip_rollbacks: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            align_threshold: 0.9,
            min_chars: 10,
            max_chars: 256,
            phrase_theta: 10,
            phrase_score_threshold: 10.0,
            skip_rollbacks: false,
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.align_threshold > 0.0 && self.align_threshold <= 1.0) {
            return Err(format!("align threshold {} outside (0, 1]", self.align_threshold));
        }
        if self.min_chars >= self.max_chars {
            return Err(format!("min chars {} not below max chars {}", self.min_chars, self.max_chars));
        }
        Ok(())
    }
}

/// Pair sentences of two consecutive revisions.
///
/// Candidate pairs at or above `threshold` are taken greedily by descending
/// similarity so that each sentence on either side is used at most once.
/// Unchanged sentences take part in the matching (they consume their
/// partner) but are not emitted.
pub fn align(originals: &[String], edited: &[String], threshold: f64, post_id: u64) -> Vec<SentencePair> {
    let mut candidates = Vec::new();
    for (i, o) in originals.iter().enumerate() {
        let o_len = o.chars().count();
        for (j, e) in edited.iter().enumerate() {
            let e_len = e.chars().count();
            let (short, long) = (o_len.min(e_len), o_len.max(e_len));
            // the distance is at least the length difference
            if long > 0 && (short as f64 / long as f64) < threshold {
                continue;
            }
            let sim = text_similarity(o, e);
            if sim >= threshold {
                candidates.push((sim, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used_o = vec![false; originals.len()];
    let mut used_e = vec![false; edited.len()];
    let mut matched = Vec::new();
    for (sim, i, j) in candidates {
        if used_o[i] || used_e[j] {
            continue;
        }
        used_o[i] = true;
        used_e[j] = true;
        if originals[i] != edited[j] {
            matched.push((i, sim, j));
        }
    }
    matched.sort_by_key(|m| m.0);
    matched
        .into_iter()
        .map(|(i, sim, j)| SentencePair {
            original: originals[i].clone(),
            edited: edited[j].clone(),
            similarity: sim,
            post_id,
            edit_types: BTreeSet::new(),
        })
        .collect()
}

fn has_formula(s: &str) -> bool {
    math_regions(s).iter().any(|r| r.closed)
}

/// Whether a pair survives the noise filter: some side carries a formula,
/// the formulas changed, and both sides have an acceptable length.
pub fn keep_pair(pair: &SentencePair, config: &MinerConfig) -> bool {
    let within = |s: &str| (config.min_chars..=config.max_chars).contains(&s.chars().count());
    (has_formula(&pair.original) || has_formula(&pair.edited))
        && formulas_differ(&pair.original, &pair.edited)
        && within(&pair.original)
        && within(&pair.edited)
}

pub fn filter_pairs(pairs: Vec<SentencePair>, config: &MinerConfig) -> Vec<SentencePair> {
    pairs.into_iter().filter(|p| keep_pair(p, config)).collect()
}
