use std::collections::BTreeMap;

use rayon::prelude::*;

use super::classify::classify_edit;
use super::dump::PostRevision;
use super::pairs::{align, keep_pair, MinerConfig, SentencePair};
use super::sentences::split_sentences;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct MineStats {
    pub posts: usize,
    pub revision_pairs: usize,
    pub rollbacks_skipped: usize,
    pub aligned_pairs: usize,
    pub kept_pairs: usize,
}

#[derive(Debug, Default, Clone)]
pub struct MineOutput {
    pub pairs: Vec<SentencePair>,
    pub stats: MineStats,
}

struct PostResult {
    pairs: Vec<(u32, SentencePair)>,
    stats: MineStats,
}

fn mine_post(revisions: &[&PostRevision], config: &MinerConfig) -> PostResult {
    let mut result = PostResult { pairs: Vec::new(), stats: MineStats { posts: 1, ..Default::default() } };
    for w in revisions.windows(2) {
        let (before, after) = (w[0], w[1]);
        if config.skip_rollbacks && after.is_rollback {
            result.stats.rollbacks_skipped += 1;
            continue;
        }
        result.stats.revision_pairs += 1;
        let aligned = align(
            &split_sentences(&before.body),
            &split_sentences(&after.body),
            config.align_threshold,
            before.post_id,
        );
        result.stats.aligned_pairs += aligned.len();
        for mut pair in aligned {
            if keep_pair(&pair, config) {
                pair.edit_types = classify_edit(&pair.original, &pair.edited);
                result.pairs.push((after.revision_index, pair));
            }
        }
    }
    result.stats.kept_pairs = result.pairs.len();
    result
}

/// Build the sentence-pair corpus from the body revisions of a dump.
///
/// Consecutive revisions of each post are split, aligned, filtered and
/// classified; posts are processed in parallel and the pairs come back
/// ordered by post id and revision index.
pub fn mine_corpus(revisions: &[PostRevision], config: &MinerConfig) -> MineOutput {
    let mut posts: BTreeMap<u64, Vec<&PostRevision>> = BTreeMap::new();
    for r in revisions {
        posts.entry(r.post_id).or_default().push(r);
    }
    for revs in posts.values_mut() {
        revs.sort_by_key(|r| r.revision_index);
    }
    let posts: Vec<Vec<&PostRevision>> = posts.into_values().collect();
    let results: Vec<PostResult> = posts.par_iter().map(|revs| mine_post(revs, config)).collect();

    let mut output = MineOutput::default();
    let mut keyed = Vec::new();
    for r in results {
        output.stats.posts += r.stats.posts;
        output.stats.revision_pairs += r.stats.revision_pairs;
        output.stats.rollbacks_skipped += r.stats.rollbacks_skipped;
        output.stats.aligned_pairs += r.stats.aligned_pairs;
        output.stats.kept_pairs += r.stats.kept_pairs;
        keyed.extend(r.pairs);
    }
    keyed.sort_by_key(|(rev, p)| (p.post_id, *rev));
    output.pairs = keyed.into_iter().map(|(_, p)| p).collect();
    output
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::pairs::EditType;

    fn rev(post_id: u64, index: u32, body: &str, rollback: bool) -> PostRevision {
        PostRevision {
            post_id,
            revision_index: index,
            body: body.into(),
            comment: None,
            is_question: false,
            is_rollback: rollback,
        }
    }

    #[test]
    fn mines_latexification() {
        let revs = vec![
            rev(1, 1, "Hello there. After simplifying both sides of the original quadratic equation and collecting the remaining terms we get x - root2 here. Bye now.", false),
            rev(1, 2, r"Hello there. After simplifying both sides of the original quadratic equation and collecting the remaining terms we get $x-\sqrt{2}$ here. Bye now.", false),
        ];
        let out = mine_corpus(&revs, &MinerConfig::default());
        assert_eq!(out.pairs.len(), 1);
        assert!(out.pairs[0].edit_types.contains(&EditType::Latexification));
        assert_eq!(out.stats.revision_pairs, 1);
    }

    #[test]
    fn rollback_can_be_skipped() {
        let revs = vec![
            rev(1, 1, r"After simplifying both sides of the original quadratic equation and collecting the remaining terms we get $x-\sqrt{2}$ here.", false),
            rev(1, 2, "After simplifying both sides of the original quadratic equation and collecting the remaining terms we get x - root2 here.", true),
        ];
        let cfg = MinerConfig { skip_rollbacks: true, ..Default::default() };
        let out = mine_corpus(&revs, &cfg);
        assert!(out.pairs.is_empty());
        assert_eq!(out.stats.rollbacks_skipped, 1);
        assert_eq!(mine_corpus(&revs, &MinerConfig::default()).pairs.len(), 1);
    }

    #[test]
    fn output_is_sorted_by_post() {
        let mut revs = Vec::new();
        for post in [9u64, 3, 5] {
            revs.push(rev(post, 1, "for every integer we have x^2 + 1 here.", false));
            revs.push(rev(post, 2, "for every integer we have $x^2 + 1$ here.", false));
        }
        let ids: Vec<u64> = mine_corpus(&revs, &MinerConfig::default()).pairs.iter().map(|p| p.post_id).collect();
        assert_eq!(ids, [3, 5, 9]);
    }
}
