//! Corpus BLEU and GLEU, and the textual and visual evaluation runs that
//! produce an [`EvalReport`].

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edit::{apply_suggestions, suggest_edits, AdapterError, Candidate, EditRule, ModelAdapter};
use crate::latex::canonical_tokens;
use crate::markup::math_regions;
use crate::miner::SentencePair;
use crate::render::Bitmap;
use crate::visual::{image_similarity, rerank, SimilarityOptions, MAX_CANDIDATES};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("expected {expected} sequences, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Metric tokens of a sentence: math regions are canonicalized and split
/// into LaTeX tokens, then everything is split on whitespace.
pub fn sentence_tokens(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() * 2);
    let mut last = 0;
    for region in math_regions(text).into_iter().filter(|r| r.closed) {
        spaced.push_str(&text[last..region.outer.start]);
        spaced.push(' ');
        spaced.push_str(&text[region.outer.start..region.inner.start]);
        spaced.push(' ');
        spaced.push_str(&canonical_tokens(&text[region.inner.clone()]).join(" "));
        spaced.push(' ');
        spaced.push_str(&text[region.inner.end..region.outer.end]);
        spaced.push(' ');
        last = region.outer.end;
    }
    spaced.push_str(&text[last..]);
    spaced.split_whitespace().map(str::to_string).collect()
}

/// Metric tokens of a bare formula.
pub fn formula_tokens(latex: &str) -> Vec<String> {
    canonical_tokens(latex)
}

type Counts<'a> = HashMap<&'a [String], usize>;

fn ngrams(tokens: &[String], n: usize) -> Counts<'_> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn clipped(hyp: &Counts, reference: &Counts) -> usize {
    hyp.iter().map(|(g, c)| (*c).min(reference.get(g).copied().unwrap_or(0))).sum()
}

/// Per-sentence statistics: for each order, (matches, hypothesis n-grams).
#[derive(Debug, Clone, Default, PartialEq)]
struct Stats {
    orders: Vec<(usize, usize)>,
    hyp_len: usize,
    ref_len: usize,
}

impl Stats {
    fn add(&mut self, other: &Stats) {
        if self.orders.is_empty() {
            self.orders = vec![(0, 0); other.orders.len()];
        }
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            a.0 += b.0;
            a.1 += b.1;
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

fn bleu_stats(hyp: &[String], reference: &[String], max_n: usize) -> Stats {
    let orders = (1..=max_n)
        .map(|n| {
            let h = ngrams(hyp, n);
            (clipped(&h, &ngrams(reference, n)), hyp.len().saturating_sub(n - 1))
        })
        .collect();
    Stats { orders, hyp_len: hyp.len(), ref_len: reference.len() }
}

fn gleu_stats(source: &[String], hyp: &[String], reference: &[String], max_n: usize) -> Stats {
    let orders = (1..=max_n)
        .map(|n| {
            let (h, r, s) = (ngrams(hyp, n), ngrams(reference, n), ngrams(source, n));
            let penalty: usize = h
                .iter()
                .filter(|(g, _)| !r.contains_key(*g))
                .map(|(g, c)| (*c).min(s.get(g).copied().unwrap_or(0)))
                .sum();
            (clipped(&h, &r).saturating_sub(penalty), hyp.len().saturating_sub(n - 1))
        })
        .collect();
    Stats { orders, hyp_len: hyp.len(), ref_len: reference.len() }
}

/// Geometric mean of the precisions times the brevity penalty, in 0..=100.
/// Orders for which the hypotheses have no n-grams at all are left out.
fn combine(stats: &Stats, smooth: bool) -> f64 {
    if stats.hyp_len == 0 {
        return if stats.ref_len == 0 { 100.0 } else { 0.0 };
    }
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for (i, &(matches, total)) in stats.orders.iter().enumerate() {
        if total == 0 {
            continue;
        }
        let (m, t) = if smooth && i > 0 && matches == 0 { (1.0, total as f64 + 1.0) } else { (matches as f64, total as f64) };
        if m == 0.0 {
            return 0.0;
        }
        log_sum += (m / t).ln();
        used += 1;
    }
    let (c, r) = (stats.hyp_len as f64, stats.ref_len as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    (100.0 * bp * (log_sum / used.max(1) as f64).exp()).clamp(0.0, 100.0)
}

fn check_lengths(expected: usize, lists: &[usize]) -> Result<(), MetricsError> {
    if expected == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    match lists.iter().find(|l| **l != expected) {
        Some(&found) => Err(MetricsError::LengthMismatch { expected, found }),
        None => Ok(()),
    }
}

/// Corpus-level BLEU with clipped n-gram precisions up to `max_n`.
pub fn bleu(hypotheses: &[Vec<String>], references: &[Vec<String>], max_n: usize) -> Result<f64, MetricsError> {
    check_lengths(hypotheses.len(), &[references.len()])?;
    let mut total = Stats::default();
    for (h, r) in hypotheses.iter().zip(references) {
        total.add(&bleu_stats(h, r, max_n));
    }
    Ok(combine(&total, false))
}

/// Corpus-level GLEU: like BLEU, but n-grams the hypothesis keeps from the
/// source that the reference dropped count against it.
pub fn gleu(sources: &[Vec<String>], hypotheses: &[Vec<String>], references: &[Vec<String>]) -> Result<f64, MetricsError> {
    check_lengths(hypotheses.len(), &[sources.len(), references.len()])?;
    let mut total = Stats::default();
    for ((s, h), r) in sources.iter().zip(hypotheses).zip(references) {
        total.add(&gleu_stats(s, h, r, MAX_ORDER));
    }
    Ok(combine(&total, false))
}

/// BLEU of one sentence, add-one smoothed for orders above one.
pub fn sentence_bleu(hypothesis: &[String], reference: &[String]) -> f64 {
    combine(&bleu_stats(hypothesis, reference, MAX_ORDER), true)
}

pub fn sentence_gleu(source: &[String], hypothesis: &[String], reference: &[String]) -> f64 {
    combine(&gleu_stats(source, hypothesis, reference, MAX_ORDER), true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScores {
    pub id: String,
    pub scores: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gleu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_similarity_mean: Option<f64>,
    /// Share of examples whose hypothesis matches the reference exactly.
    pub exact_match: f64,
    pub n_examples: usize,
    pub per_example: Vec<ExampleScores>,
}

impl EvalReport {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), MetricsError> {
        serde_json::to_writer_pretty(&mut out, self).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// One row per example; columns are the union of score names.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MetricsError> {
        let names: std::collections::BTreeSet<&str> =
            self.per_example.iter().flat_map(|e| e.scores.keys().map(String::as_str)).collect();
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["id"];
        header.extend(names.iter().copied());
        header.push("error");
        writer.write_record(&header)?;
        for e in &self.per_example {
            let mut row = vec![e.id.clone()];
            row.extend(names.iter().map(|n| e.scores.get(*n).map(|v| v.to_string()).unwrap_or_default()));
            row.push(e.error.clone().unwrap_or_default());
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn pair_id(pair: &SentencePair, index: usize) -> String {
    format!("{}:{index}", pair.post_id)
}

fn hypothesis_for(
    original: &str,
    rules: &[EditRule],
    adapter: Option<&mut dyn ModelAdapter>,
) -> Result<String, AdapterError> {
    let out = suggest_edits(original, rules, adapter)?;
    Ok(apply_suggestions(original, &out.suggestions, |s| Some(&s.suggested)))
}

/// Run the suggestion engine on every original sentence and score the
/// output against the edited sentences. Sentences without a suggestion
/// are scored as-is.
pub fn evaluate_textual(
    corpus: &[SentencePair],
    rules: &[EditRule],
    adapter: Option<&mut dyn ModelAdapter>,
) -> Result<EvalReport, MetricsError> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let hypotheses: Vec<String> = match adapter {
        None => corpus
            .par_iter()
            .map(|p| hypothesis_for(&p.original, rules, None))
            .collect::<Result<_, _>>()?,
        Some(adapter) => {
            let mut out = Vec::with_capacity(corpus.len());
            for p in corpus {
                out.push(hypothesis_for(&p.original, rules, Some(&mut *adapter))?);
            }
            out
        }
    };
    score_textual(corpus, &hypotheses)
}

/// Score given hypotheses, one per corpus pair.
pub fn score_textual(corpus: &[SentencePair], hypotheses: &[String]) -> Result<EvalReport, MetricsError> {
    check_lengths(corpus.len(), &[hypotheses.len()])?;
    let sources: Vec<Vec<String>> = corpus.iter().map(|p| sentence_tokens(&p.original)).collect();
    let references: Vec<Vec<String>> = corpus.iter().map(|p| sentence_tokens(&p.edited)).collect();
    let hyps: Vec<Vec<String>> = hypotheses.iter().map(|h| sentence_tokens(h)).collect();

    let per_example: Vec<ExampleScores> = (0..corpus.len())
        .map(|i| {
            let exact = f64::from(u8::from(hyps[i] == references[i]));
            let scores = BTreeMap::from([
                ("bleu".to_string(), sentence_bleu(&hyps[i], &references[i])),
                ("gleu".to_string(), sentence_gleu(&sources[i], &hyps[i], &references[i])),
                ("exact_match".to_string(), exact),
            ]);
            ExampleScores { id: pair_id(&corpus[i], i), scores, error: None }
        })
        .collect();
    let exact = per_example.iter().map(|e| e.scores["exact_match"]).sum::<f64>() / corpus.len() as f64;
    Ok(EvalReport {
        bleu: bleu(&hyps, &references, MAX_ORDER)?,
        gleu: Some(gleu(&sources, &hyps, &references)?),
        image_similarity_mean: None,
        exact_match: exact,
        n_examples: corpus.len(),
        per_example,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualItem {
    pub id: String,
    pub image: Bitmap,
    pub reference_latex: String,
}

struct VisualOutcome {
    hypothesis: Vec<String>,
    reference: Vec<String>,
    similarity: f64,
}

/// Re-rank each item's candidates against its image and score the chosen
/// transcriptions. Items without candidates are reported as failures and
/// left out of the corpus scores.
pub fn evaluate_visual<F>(items: &[VisualItem], candidates_for: F) -> Result<EvalReport, MetricsError>
where
    F: Fn(&VisualItem) -> Vec<Candidate> + Sync,
{
    if items.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let eval_options = SimilarityOptions::evaluation();
    let outcomes: Vec<Result<VisualOutcome, String>> = items
        .par_iter()
        .map(|item| {
            let mut candidates = candidates_for(item);
            candidates.truncate(MAX_CANDIDATES);
            let best = rerank(&item.image, &candidates).into_iter().next().ok_or_else(|| "no candidates".to_string())?;
            let similarity = best.rendered.as_ref().map_or(0.0, |b| image_similarity(b, &item.image, &eval_options));
            Ok(VisualOutcome {
                hypothesis: formula_tokens(&best.candidate.text),
                reference: formula_tokens(&item.reference_latex),
                similarity,
            })
        })
        .collect();

    let mut per_example = Vec::with_capacity(items.len());
    let (mut hyps, mut refs, mut sims) = (Vec::new(), Vec::new(), Vec::new());
    for (item, outcome) in items.iter().zip(outcomes) {
        match outcome {
            Ok(o) => {
                let exact = f64::from(u8::from(o.hypothesis == o.reference));
                let scores = BTreeMap::from([
                    ("bleu".to_string(), sentence_bleu(&o.hypothesis, &o.reference)),
                    ("image_similarity".to_string(), o.similarity),
                    ("exact_match".to_string(), exact),
                ]);
                per_example.push(ExampleScores { id: item.id.clone(), scores, error: None });
                hyps.push(o.hypothesis);
                refs.push(o.reference);
                sims.push(o.similarity);
            }
            Err(e) => per_example.push(ExampleScores { id: item.id.clone(), scores: BTreeMap::new(), error: Some(e) }),
        }
    }
    let scored = hyps.len();
    let exact = per_example.iter().filter(|e| e.scores.get("exact_match") == Some(&1.0)).count() as f64 / items.len() as f64;
    Ok(EvalReport {
        bleu: if scored == 0 { 0.0 } else { bleu(&hyps, &refs, MAX_ORDER)? },
        gleu: None,
        image_similarity_mean: (scored > 0).then(|| sims.iter().sum::<f64>() / scored as f64),
        exact_match: exact,
        n_examples: items.len(),
        per_example,
    })
}
