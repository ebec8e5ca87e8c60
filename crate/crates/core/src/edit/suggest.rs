use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adapter::{AdapterError, ModelAdapter};
use super::apply::{apply_rules, Candidate};
use super::postprocess::postprocess;
use super::rules::EditRule;
use crate::miner::sentences::sentence_spans;
use crate::miner::{classify_edit, levenshtein, EditType};
use crate::normalize::{denormalize, normalize_with, CommandWords, NormalizeOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub sentence_index: usize,
    pub original: String,
    pub suggested: String,
    pub edit_types: BTreeSet<EditType>,
    pub confidence: f64,
    /// Byte range of the sentence in the post body.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuggestOutput {
    pub suggestions: Vec<Suggestion>,
    pub diagnostics: Vec<String>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Best first: higher score, then fewer characters changed.
pub fn order_candidates(candidates: &mut [Candidate], original: &str) {
    candidates.sort_by_cached_key(|c| levenshtein(&c.text, original));
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score));
}

enum Outcome {
    Suggested(String, f64),
    Nothing,
    Diagnostic(String),
}

fn finish(sentence: &str, index: usize, template: &str, mut candidates: Vec<Candidate>, map: &[crate::normalize::Placeholder]) -> Outcome {
    order_candidates(&mut candidates, template);
    let Some(best) = candidates.into_iter().next() else {
        return Outcome::Nothing;
    };
    match denormalize(&best.text, map) {
        Ok(text) => {
            let suggested = postprocess(&text);
            if suggested == sentence {
                Outcome::Nothing
            } else {
                Outcome::Suggested(suggested, logistic(best.score))
            }
        }
        Err(e) => Outcome::Diagnostic(format!("sentence {index}: {e}; no suggestion")),
    }
}

/// Suggestions for one post body, at most one per sentence.
///
/// Without an adapter the mined rules produce the candidates and numbers
/// stay verbatim; with one, numbers are normalized too and the adapter's
/// candidates are used instead.
pub fn suggest_edits(
    body: &str,
    rules: &[EditRule],
    adapter: Option<&mut dyn ModelAdapter>,
) -> Result<SuggestOutput, AdapterError> {
    let spans = sentence_spans(body);
    let words = CommandWords::builtin();
    let outcomes: Vec<Outcome> = match adapter {
        None => spans
            .par_iter()
            .enumerate()
            .map(|(i, span)| {
                let sentence = &body[span.clone()];
                let n = normalize_with(sentence, NormalizeOptions { numbers: false }, words);
                let candidates = apply_rules(&n.template, rules);
                finish(sentence, i, &n.template, candidates, &n.placeholder_map)
            })
            .collect(),
        Some(adapter) => {
            let mut out = Vec::with_capacity(spans.len());
            for (i, span) in spans.iter().enumerate() {
                let sentence = &body[span.clone()];
                let n = normalize_with(sentence, NormalizeOptions { numbers: true }, words);
                let candidates = adapter.candidates(&n.template)?;
                out.push(finish(sentence, i, &n.template, candidates, &n.placeholder_map));
            }
            out
        }
    };

    let mut output = SuggestOutput::default();
    for ((i, span), outcome) in spans.iter().enumerate().zip(outcomes) {
        match outcome {
            Outcome::Suggested(suggested, confidence) => {
                let original = body[span.clone()].to_string();
                output.suggestions.push(Suggestion {
                    sentence_index: i,
                    edit_types: classify_edit(&original, &suggested),
                    original,
                    suggested,
                    confidence,
                    start: span.start,
                    end: span.end,
                });
            }
            Outcome::Nothing => {}
            Outcome::Diagnostic(d) => output.diagnostics.push(d),
        }
    }
    Ok(output)
}

/// Replace each suggestion's sentence by `text_for(suggestion)`; `None`
/// keeps the original. Suggestions must not overlap.
pub fn apply_suggestions<'a, F>(body: &str, suggestions: &'a [Suggestion], mut text_for: F) -> String
where
    F: FnMut(&'a Suggestion) -> Option<&'a str>,
{
    let mut edits: Vec<(Range<usize>, &str)> =
        suggestions.iter().filter_map(|s| text_for(s).map(|t| (s.start..s.end, t))).collect();
    edits.sort_by_key(|(r, _)| std::cmp::Reverse(r.start));
    let mut out = body.to_string();
    for (range, text) in edits {
        out.replace_range(range, text);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::apply::CandidateSource;

    fn root_rule() -> EditRule {
        EditRule {
            lhs: vec!["root".into(), "2".into()],
            rhs: vec![r"\sqrt".into(), "{".into(), "2".into(), "}".into()],
            support: 3,
            context_left: None,
            context_right: None,
        }
    }

    #[test]
    fn quoted_variable_in_body() {
        let out = suggest_edits("We know that. ' i ' is part of the ratio", &[], None).unwrap();
        assert_eq!(out.suggestions.len(), 1);
        assert_eq!(out.suggestions[0].sentence_index, 1);
        assert_eq!(out.suggestions[0].suggested, "$ i $ is part of the ratio");
    }

    #[test]
    fn prose_body_has_no_suggestions() {
        assert!(suggest_edits("Just words. Nothing else!", &[root_rule()], None).unwrap().suggestions.is_empty());
        assert!(suggest_edits(r"$\frac{a}{b}$", &[root_rule()], None).unwrap().suggestions.is_empty());
    }

    #[test]
    fn twice_is_a_fixed_point() {
        let body = "So we get x - root2 here. Then formula: y + py = px - 2p for which value ( s ) of p 1";
        let rules = [root_rule()];
        let first = suggest_edits(body, &rules, None).unwrap();
        assert_eq!(first.suggestions.len(), 2);
        let applied = apply_suggestions(body, &first.suggestions, |s| Some(&s.suggested));
        assert!(applied.contains(r"$x-\sqrt{2}$"));
        assert!(suggest_edits(&applied, &rules, None).unwrap().suggestions.is_empty());
        for s in &first.suggestions {
            assert_eq!(postprocess(&s.suggested), s.suggested);
        }
    }

    struct Fixed(Vec<Candidate>);

    impl ModelAdapter for Fixed {
        fn candidates(&mut self, _: &str) -> Result<Vec<Candidate>, AdapterError> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn adapter_mismatch_is_a_diagnostic() {
        let mut adapter = Fixed(vec![Candidate { text: "$x$".into(), score: 1.0, source: CandidateSource::Adapter }]);
        let out = suggest_edits("hello x world", &[], Some(&mut adapter)).unwrap();
        assert!(out.suggestions.is_empty());
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn adapter_candidates_are_used() {
        let text = "COMMON_WORDS $ NUM_0 + x $".to_string();
        let mut adapter = Fixed(vec![Candidate { text, score: 2.0, source: CandidateSource::Adapter }]);
        let out = suggest_edits("we have 2 + x", &[], Some(&mut adapter)).unwrap();
        assert_eq!(out.suggestions[0].suggested, "we have $ 2 + x $");
        assert!((out.suggestions[0].confidence - logistic(2.0)).abs() < 1e-12);
    }
}
