use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did",
    "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "him", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "me", "more", "most", "my", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "out", "over", "own", "same", "she", "should", "so", "some",
    "such", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where",
    "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
];

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.binary_search(&word).is_ok()
}

/// Lowercase, replace punctuation by spaces and drop stop words.
pub fn preprocess_comment(comment: &str) -> Vec<String> {
    comment
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !is_stop_word(w))
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phrase {
    pub first: String,
    pub second: String,
    pub count: u64,
    pub score: f64,
}

/// Bigram phrases of already preprocessed comments (words separated by
/// whitespace).
///
/// `score = (count(a b) - theta) / (count(a) * count(b)) * N` with `N` the
/// vocabulary size. Bigrams whose joint count does not exceed `theta` are
/// never emitted. The result is ordered by descending score.
pub fn detect_phrases(comments: &[String], theta: u64, score_threshold: f64) -> Vec<Phrase> {
    let mut unigrams: BTreeMap<&str, u64> = BTreeMap::new();
    let mut bigrams: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for comment in comments {
        let words: Vec<&str> = comment.split_whitespace().collect();
        for w in &words {
            *unigrams.entry(w).or_default() += 1;
        }
        for pair in words.windows(2) {
            *bigrams.entry((pair[0], pair[1])).or_default() += 1;
        }
    }
    let vocabulary: BTreeSet<&str> = unigrams.keys().copied().collect();
    let n = vocabulary.len() as f64;

    let mut phrases: Vec<Phrase> = bigrams
        .into_iter()
        .filter(|&(_, count)| count > theta)
        .filter_map(|((a, b), count)| {
            let score = (count - theta) as f64 / (unigrams[a] as f64 * unigrams[b] as f64) * n;
            (score >= score_threshold).then(|| Phrase { first: a.into(), second: b.into(), count, score })
        })
        .collect();
    phrases.sort_by(|x, y| y.score.total_cmp(&x.score));
    phrases
}
