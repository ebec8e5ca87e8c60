//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints its own PASS/FAIL line, even when another one fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use latexedit::edit::{apply_suggestions, mine_rules, suggest_edits, Candidate, CandidateSource, DEFAULT_MIN_SUPPORT};
use latexedit::latex::{canonical_tree, canonicalize, serialize, CanonConfig, FormulaNode, Token, TokenKind};
use latexedit::metrics::{bleu, evaluate_visual, gleu, VisualItem, MAX_ORDER};
use latexedit::miner::{levenshtein, mine_corpus, parse_dump, EditType, MinerConfig, SentencePair};
use latexedit::normalize::{denormalize, normalize, normalize_with, CommandWords, NormalizeOptions};
use latexedit::render::{render, Bitmap, RenderOptions};
use latexedit::visual::{image_similarity, rerank, SimilarityOptions};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

// canonicalization

fn random_atom(rng: &mut Pcg32) -> FormulaNode {
    const LETTERS: &[&str] = &["a", "b", "x", "y", "A", "n"];
    const OPS: &[&str] = &["+", "-", "=", "<", "(", ")", ","];
    const CMDS: &[&str] = &[r"\alpha", r"\pi", r"\infty", r"\cdot", r"\sum", r"\int"];
    match rng.random_range(0..4) {
        0 => FormulaNode::atom(TokenKind::Letter, LETTERS[rng.random_range(0..LETTERS.len())]),
        1 => FormulaNode::atom(TokenKind::Digit, &rng.random_range(0..10).to_string()),
        2 => FormulaNode::atom(TokenKind::Operator, OPS[rng.random_range(0..OPS.len())]),
        _ => FormulaNode::Atom(Token::new(TokenKind::Command, CMDS[rng.random_range(0..CMDS.len())])),
    }
}

fn random_tree(rng: &mut Pcg32, depth: usize) -> FormulaNode {
    if depth == 0 || rng.random_range(0..10) < 3 {
        return random_atom(rng);
    }
    let sub = |rng: &mut Pcg32| Box::new(random_tree(rng, depth - 1));
    match rng.random_range(0..8) {
        0 => FormulaNode::Row((0..rng.random_range(2..5)).map(|_| random_tree(rng, depth - 1)).collect()),
        1 => FormulaNode::Group(sub(rng)),
        2 => FormulaNode::Frac(sub(rng), sub(rng)),
        3 => {
            let radicand = sub(rng);
            let index = rng.random_bool(0.3).then(|| sub(rng));
            FormulaNode::Sqrt { radicand, index }
        }
        4 | 5 => {
            let base = Box::new(random_atom(rng));
            let (has_sub, has_sup) = match rng.random_range(0..3) {
                0 => (true, false),
                1 => (false, true),
                _ => (true, true),
            };
            FormulaNode::Script {
                base,
                sub: has_sub.then(|| sub(rng)),
                sup: has_sup.then(|| sub(rng)),
                sup_first: rng.random_bool(0.5),
            }
        }
        6 => FormulaNode::Cmd { name: "over".into(), args: vec![random_tree(rng, depth - 1), random_tree(rng, depth - 1)] },
        _ => {
            let name = ["label", "mathbf", "hat"][rng.random_range(0..3)];
            FormulaNode::Cmd { name: name.into(), args: vec![random_tree(rng, depth - 1)] }
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let config = CanonConfig::default();
    let canon = |s: &str| canonicalize(s, config).map_err(|e| format!("{s}: {e}"));
    for (input, expected) in [
        ("A^{c}_{2}", "A_{2}^{c}"),
        (r"a \over b", r"\frac{a}{b}"),
        (r"x = 1 \label{eq1}", "x=1"),
    ] {
        let got = canon(input)?;
        ensure(got.trim() == expected, || format!("{input:?} gave {got:?}, expected {expected:?}"))?;
    }
    let mut rng = Pcg32::seed_from_u64(1);
    for i in 0..1000 {
        let tree = random_tree(&mut rng, 6);
        let once = canonical_tree(tree.clone(), config);
        ensure(canonical_tree(once.clone(), config) == once, || format!("tree {i} not idempotent: {tree:?}"))?;
        let text = serialize(&tree);
        let c1 = canon(&text)?;
        let c2 = canon(&c1)?;
        ensure(c1 == c2, || format!("tree {i}: {text:?} -> {c1:?} -> {c2:?}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1), "canonicalization")?;
    Ok(format!("3 ground-truth cases, 1000 random trees idempotent, {:?}", start.elapsed()))
}

// mining

type PairKey = (u64, String, String);

fn read_expected() -> BTreeMap<PairKey, BTreeSet<EditType>> {
    fs::read_to_string(fixture("dump100.expected.jsonl"))
        .unwrap()
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            let types: BTreeSet<EditType> = serde_json::from_value(v["edit_types"].clone()).unwrap();
            let key = (v["post_id"].as_u64().unwrap(), v["original"].as_str().unwrap().into(), v["edited"].as_str().unwrap().into());
            (key, types)
        })
        .collect()
}

fn mine_fixture() -> Vec<SentencePair> {
    let file = fs::File::open(fixture("dump100.xml")).unwrap();
    let dump = parse_dump(std::io::BufReader::new(file)).unwrap();
    assert!(dump.errors.is_empty(), "fixture has format errors");
    mine_corpus(&dump.revisions, &MinerConfig::default()).pairs
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let pairs = mine_fixture();
    let elapsed = start.elapsed();
    let expected = read_expected();
    let found: BTreeMap<PairKey, BTreeSet<EditType>> =
        pairs.iter().map(|p| ((p.post_id, p.original.clone(), p.edited.clone()), p.edit_types.clone())).collect();
    ensure(found.len() == pairs.len(), || "duplicate pairs".into())?;
    let true_pos = found.iter().filter(|(k, v)| expected.get(*k) == Some(*v)).count();
    let precision = true_pos as f64 / found.len().max(1) as f64;
    let recall = true_pos as f64 / expected.len() as f64;
    if precision < 1.0 || recall < 1.0 {
        let missing: Vec<_> = expected.iter().filter(|(k, v)| found.get(*k) != Some(*v)).take(3).collect();
        let extra: Vec<_> = found.iter().filter(|(k, v)| expected.get(*k) != Some(*v)).take(3).collect();
        return Err(format!("precision {precision:.3}, recall {recall:.3}; missing {missing:?}; extra {extra:?}"));
    }
    within(elapsed, Duration::from_secs(5), "mining")?;
    let mut by_type = BTreeMap::new();
    for types in found.values() {
        for t in types {
            *by_type.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    Ok(format!("{} pairs, precision = recall = 100%, {by_type:?}, {elapsed:?}", found.len()))
}

// levenshtein

fn brute_levenshtein(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ar)), Some((y, br))) => {
            let replace = brute_levenshtein(ar, br) + usize::from(x != y);
            let delete = brute_levenshtein(ar, b) + 1;
            let insert = brute_levenshtein(a, br) + 1;
            replace.min(delete).min(insert)
        }
    }
}

fn all_strings(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        frontier = frontier.iter().flat_map(|s| ["a", "b", "c"].map(|c| format!("{s}{c}"))).collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn criterion_3() -> Outcome {
    let strings = all_strings(6);
    let mismatch = strings.par_iter().find_map_any(|a| {
        strings.iter().find_map(|b| {
            let (dp, brute) = (levenshtein(a, b), brute_levenshtein(a.as_bytes(), b.as_bytes()));
            (dp != brute).then(|| format!("{a:?} vs {b:?}: dp {dp}, oracle {brute}"))
        })
    });
    match mismatch {
        Some(m) => Err(m),
        None => Ok(format!("{} pairs agree", strings.len() * strings.len())),
    }
}

// normalizer

const WORKED: &str = "my first though was to factor by doing ( 2 + e ^ x - e ^ x ) / ( e ^ ( - x ) + 1 ) but that negative in the denominator is not letting me solve the problem ?";

fn criterion_4() -> Outcome {
    let text = fs::read_to_string(fixture("sentences1000.txt")).map_err(|e| e.to_string())?;
    let sentences: Vec<&str> = text.lines().collect();
    ensure(sentences.len() == 1000, || format!("{} sentences in fixture", sentences.len()))?;
    ensure(sentences.contains(&WORKED), || "worked example missing from fixture".into())?;
    let worked = normalize(WORKED);
    let want = "COMMON_WORDS ( 2 + e ^ x - e ^ x ) / ( e ^ ( - x ) + 1 ) COMMON_WORDS";
    ensure(worked.template == want, || format!("worked example normalized to {:?}", worked.template))?;
    let mut failures = Vec::new();
    for numbers in [false, true] {
        for s in &sentences {
            let n = normalize_with(s, NormalizeOptions { numbers }, CommandWords::builtin());
            match denormalize(&n.template, &n.placeholder_map) {
                Ok(back) if back == *s => {}
                other => failures.push(format!("{s:?} (numbers={numbers}) -> {other:?}")),
            }
        }
    }
    match failures.first() {
        Some(f) => Err(format!("{} failures, first: {f}", failures.len())),
        None => Ok("1000 sentences round-trip with and without number placeholders".into()),
    }
}

// rule engine

fn criterion_5() -> Outcome {
    let rules = mine_rules(&mine_fixture(), DEFAULT_MIN_SUPPORT);
    ensure(!rules.is_empty(), || "no rules mined from fixture".into())?;
    let check = |body: &str, needle: &str| -> Result<String, String> {
        let out = suggest_edits(body, &rules, None).map_err(|e| e.to_string())?;
        let once = apply_suggestions(body, &out.suggestions, |s| Some(s.suggested.as_str()));
        ensure(once.contains(needle), || format!("{body:?} became {once:?}, wanted {needle:?}"))?;
        let again = suggest_edits(&once, &rules, None).map_err(|e| e.to_string())?;
        let twice = apply_suggestions(&once, &again.suggestions, |s| Some(s.suggested.as_str()));
        ensure(twice == once, || format!("not a fixed point: {once:?} then {twice:?}"))?;
        Ok(once)
    };
    let formula = check("formula: y + py = px - 2p for which value ( s ) of p 1", "of $ p $ 1")?;
    let root = check("Then we get x - root2 for the answer.", r"$x-\sqrt{2}$")?;
    Ok(format!("{} rules; {formula:?}; {root:?}", rules.len()))
}

// image similarity

fn random_bitmap(rng: &mut Pcg32, width: usize, height: usize) -> Bitmap {
    let bits = (0..width * height).map(|_| u8::from(rng.random_range(0..10) > 2)).collect();
    Bitmap::from_bits(width, height, bits).unwrap()
}

fn criterion_6() -> Outcome {
    let eval = SimilarityOptions::evaluation();
    let raw = SimilarityOptions::rerank();
    let opts = RenderOptions::default();
    let mut rng = Pcg32::seed_from_u64(6);
    let formulas = [r"\frac{a}{b}", "x^2 + y^2", r"\sqrt{n} < n", r"\sum_{k=1}^{n} k", "a"];
    for f in formulas {
        let img = render(f, &opts).map_err(|e| e.to_string())?;
        for o in [&eval, &raw] {
            let s = image_similarity(&img, &img, o);
            ensure(s == 1.0, || format!("sim(I, I) = {s} for {f}"))?;
        }
        for pad in [1, 5, 17] {
            let other = render("x + 1", &opts).unwrap();
            let (a, b) = (image_similarity(&img, &other, &eval), image_similarity(&img.padded(pad), &other, &eval));
            ensure(a == b, || format!("padding {pad} changed sim for {f}: {a} vs {b}"))?;
            let s = image_similarity(&img.padded(pad), &img, &eval);
            ensure(s == 1.0, || format!("padded self-sim {s} for {f}"))?;
        }
    }
    for _ in 0..50 {
        let (w1, w2) = (rng.random_range(1..200), rng.random_range(1..200));
        let (h1, h2) = (rng.random_range(1..80), rng.random_range(1..80));
        let (a, b) = (random_bitmap(&mut rng, w1, h1), random_bitmap(&mut rng, w2, h2));
        for o in [&eval, &raw] {
            let (ab, ba) = (image_similarity(&a, &b, o), image_similarity(&b, &a, o));
            ensure((ab - ba).abs() <= f64::EPSILON, || format!("asymmetric: {ab} vs {ba}"))?;
        }
    }
    let (black, white) = (Bitmap::black(512, 64), Bitmap::white(512, 64));
    let bw = image_similarity(&black, &white, &raw);
    ensure(bw == 0.0, || format!("black vs white = {bw}"))?;

    let (a, b) = (random_bitmap(&mut rng, 512, 64), random_bitmap(&mut rng, 512, 64));
    let start = Instant::now();
    let rounds = 10;
    for _ in 0..rounds {
        std::hint::black_box(image_similarity(&a, &b, &raw));
    }
    let per_pair = start.elapsed() / rounds;
    within(per_pair, Duration::from_millis(50), "512-wide pair")?;
    Ok(format!("identity, symmetry, black/white, padding hold; {per_pair:?} per 512-wide pair"))
}

// re-ranking

const LETTERS: &[&str] = &["a", "b", "c", "x", "y", "z", "n", "k"];
const DIGITS: &[&str] = &["1", "2", "3", "4", "5", "7", "9"];
const OPS: &[&str] = &["+", "-", "=", "<", ">"];

fn pick<'a>(rng: &mut Pcg32, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

fn random_formula(rng: &mut Pcg32) -> String {
    let term = |rng: &mut Pcg32| -> String {
        match rng.random_range(0..5) {
            0 => format!("{}^{{{}}}", pick(rng, LETTERS), pick(rng, DIGITS)),
            1 => format!(r"\frac{{{}}}{{{}}}", pick(rng, LETTERS), pick(rng, DIGITS)),
            2 => format!(r"\sqrt{{{}}}", pick(rng, LETTERS)),
            3 => format!("{}_{{{}}}", pick(rng, LETTERS), pick(rng, LETTERS)),
            _ => format!("{}{}", pick(rng, DIGITS), pick(rng, LETTERS)),
        }
    };
    let mut out = term(rng);
    for _ in 0..rng.random_range(1..4) {
        out = format!("{out} {} {}", pick(rng, OPS), term(rng));
    }
    out
}

/// Replace one letter, digit or operator by another of the same class.
fn perturb(rng: &mut Pcg32, formula: &str) -> String {
    let chars: Vec<char> = formula.chars().collect();
    let slots: Vec<(usize, &[&str])> = chars
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let prev_is_cmd = chars[..i].iter().rev().take_while(|c| c.is_ascii_alphabetic()).count() > 0
                && chars[..i].iter().rev().find(|c| !c.is_ascii_alphabetic()) == Some(&'\\');
            let s = c.to_string();
            if prev_is_cmd || (c.is_ascii_alphabetic() && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphabetic())) {
                None
            } else if LETTERS.contains(&s.as_str()) {
                Some((i, LETTERS))
            } else if DIGITS.contains(&s.as_str()) {
                Some((i, DIGITS))
            } else if OPS.contains(&s.as_str()) {
                Some((i, OPS))
            } else {
                None
            }
        })
        .collect();
    let (i, pool) = slots[rng.random_range(0..slots.len())];
    loop {
        let replacement = pick(rng, pool);
        if replacement != chars[i].to_string() {
            let mut out: String = chars[..i].iter().collect();
            out.push_str(replacement);
            out.extend(&chars[i + 1..]);
            return out;
        }
    }
}

fn candidate(text: String) -> Candidate {
    Candidate { text, score: 0.0, source: CandidateSource::File }
}

fn trial_set(rng: &mut Pcg32) -> (String, Vec<Candidate>) {
    let truth = random_formula(rng);
    let mut texts = BTreeSet::from([truth.clone()]);
    let mut candidates = vec![candidate(truth.clone())];
    while candidates.len() < 5 {
        let p = perturb(rng, &truth);
        if texts.insert(p.clone()) {
            candidates.push(candidate(p));
        }
    }
    let at = rng.random_range(0..5);
    candidates.swap(0, at);
    (truth, candidates)
}

fn criterion_7() -> Outcome {
    let mut rng = Pcg32::seed_from_u64(7);
    let trials: Vec<(String, Vec<Candidate>)> = (0..200).map(|_| trial_set(&mut rng)).collect();
    let opts = RenderOptions::default();
    let mut items = Vec::new();
    let mut hits = 0;
    let mut misses = Vec::new();
    for (i, (truth, candidates)) in trials.iter().enumerate() {
        let image = render(truth, &opts).map_err(|e| format!("{truth}: {e}"))?;
        let best = &rerank(&image, candidates)[0];
        if &best.candidate.text == truth {
            hits += 1;
        } else {
            misses.push(format!("{truth:?} lost to {:?}", best.candidate.text));
        }
        items.push(VisualItem { id: i.to_string(), image, reference_latex: truth.clone() });
    }
    let by_id: BTreeMap<String, &Vec<Candidate>> = trials.iter().enumerate().map(|(i, t)| (i.to_string(), &t.1)).collect();
    let report = evaluate_visual(&items, |item| by_id[&item.id].clone()).map_err(|e| e.to_string())?;
    let rate = hits as f64 / trials.len() as f64;
    ensure(rate >= 0.95, || format!("selected ground truth in {hits}/200; e.g. {:?}", misses.first()))?;
    ensure(report.bleu >= 95.0, || format!("evaluate_visual BLEU {:.2}", report.bleu))?;
    Ok(format!("ground truth selected in {hits}/200 trials, BLEU {:.2}", report.bleu))
}

// metrics

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn grams(tokens: &[String], n: usize) -> Vec<&[String]> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| &tokens[i..i + n]).collect()
}

fn count(list: &[&[String]], g: &[String]) -> usize {
    list.iter().filter(|x| **x == g).count()
}

/// Straight from the definitions, counting by linear scans.
fn oracle(sources: Option<&[Vec<String>]>, hyps: &[Vec<String>], refs: &[Vec<String>]) -> f64 {
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut c, mut r) = (0usize, 0usize);
    for (i, (h, rf)) in hyps.iter().zip(refs).enumerate() {
        c += h.len();
        r += rf.len();
        for n in 1..=MAX_ORDER {
            let (hg, rg) = (grams(h, n), grams(rf, n));
            let sg = sources.map(|s| grams(&s[i], n)).unwrap_or_default();
            let mut distinct: Vec<&[String]> = Vec::new();
            for g in &hg {
                if !distinct.contains(g) {
                    distinct.push(g);
                }
            }
            let clipped: usize = distinct.iter().map(|g| count(&hg, g).min(count(&rg, g))).sum();
            let penalty: usize =
                distinct.iter().filter(|g| count(&rg, g) == 0).map(|g| count(&hg, g).min(count(&sg, g))).sum();
            matches[n - 1] += clipped.saturating_sub(penalty);
            totals[n - 1] += hg.len();
        }
    }
    if c == 0 {
        return if r == 0 { 100.0 } else { 0.0 };
    }
    let used: Vec<f64> = (0..MAX_ORDER).filter(|&k| totals[k] > 0).map(|k| matches[k] as f64 / totals[k] as f64).collect();
    if used.contains(&0.0) {
        return 0.0;
    }
    let mean = (used.iter().map(|p| p.ln()).sum::<f64>() / used.len() as f64).exp();
    let bp = if c < r { (1.0 - r as f64 / c as f64).exp() } else { 1.0 };
    100.0 * bp * mean
}

const CORPORA: &[&[(&str, &str, &str)]] = &[
    &[("the cat sat on the mat", "the cat sat on the mat", "the cat sat on a mat")],
    &[
        ("x - root2 is the answer", "$ x - \\sqrt { 2 } $ is the answer", "$ x - \\sqrt { 2 } $ is the answer"),
        ("so p is 2", "so p is 2", "so $ p $ is 2"),
    ],
    &[
        ("a b c d e f g", "a b c d e f g h", "a b c d e f g"),
        ("one two three four", "one two three", "one two three four five"),
    ],
    &[("we get x ^ 2 + 1", "we get $ x ^ 2 + 1 $", "we get $ x ^ { 2 } + 1 $")],
    &[
        ("a a a a", "a a a a", "a a"),
        ("b b b b b", "b b b c b b", "b b b b b b"),
        ("c d c d c d", "c d c d", "d c d c d c"),
    ],
    &[
        ("if n > 2 then", "if $ n > 2 $ then", "if $ n > 2 $ then"),
        ("sin x + cos x", "$ \\sin x + \\cos x $", "$ \\sin x + \\cos x $"),
        ("let f ( x ) = 3", "let $ f ( x ) = 3 $", "let $ f ( x ) = 3 $ ."),
    ],
    &[("the quick brown fox jumps", "the slow brown fox jumps over", "the quick brown fox jumps over the dog")],
    &[
        ("1 2 3 4 5 6 7 8", "1 2 3 4 5 6 7 8", "1 2 3 4 9 6 7 8"),
        ("9 8 7 6 5 4", "9 8 7 6 5 4", "9 8 7 6 5 4"),
    ],
    &[
        ("\\frac a b", "\\frac { a } { b } = c", "\\frac { a } { b }"),
        ("a \\over b", "\\frac { a } { b }", "\\frac { a } { b }"),
        ("a over b plus c", "a over b plus c", "\\frac { a } { b } + c"),
        ("x y z w v u", "x y z w v u", "x y z w v u"),
    ],
    &[
        ("p q r s t", "p q r s t u v", "p q r s t u v"),
        ("m n o", "m n o p q", "m n o p q"),
        ("k l m n o p", "k l m n o", "k l m n o p"),
    ],
];

fn criterion_8() -> Outcome {
    let mut worst = 0f64;
    let mut seen = Vec::new();
    for (i, corpus) in CORPORA.iter().enumerate() {
        let s: Vec<Vec<String>> = corpus.iter().map(|t| words(t.0)).collect();
        let h: Vec<Vec<String>> = corpus.iter().map(|t| words(t.1)).collect();
        let r: Vec<Vec<String>> = corpus.iter().map(|t| words(t.2)).collect();
        let b = bleu(&h, &r, MAX_ORDER).map_err(|e| e.to_string())?;
        let g = gleu(&s, &h, &r).map_err(|e| e.to_string())?;
        let (ob, og) = (oracle(None, &h, &r), oracle(Some(&s), &h, &r));
        ensure((b - ob).abs() <= 1e-9, || format!("corpus {i}: bleu {b} vs oracle {ob}"))?;
        ensure((g - og).abs() <= 1e-9, || format!("corpus {i}: gleu {g} vs oracle {og}"))?;
        worst = worst.max((b - ob).abs()).max((g - og).abs());
        seen.push(format!("{b:.1}/{g:.1}"));
        let bi = bleu(&r, &r, MAX_ORDER).map_err(|e| e.to_string())?;
        let gi = gleu(&s, &r, &r).map_err(|e| e.to_string())?;
        ensure(bi == 100.0 && gi == 100.0, || format!("corpus {i}: identity scored bleu {bi}, gleu {gi}"))?;
    }
    Ok(format!("10 corpora within {worst:e} of the oracle (bleu/gleu {}); identity scores 100", seen.join(" ")))
}

// determinism

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_latexedit"))
        .current_dir(dir)
        .args(args)
        .env("LATEXEDIT_SEED", "11")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

/// Every file in `dir` plus the captured stdout of each command.
fn pipeline(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    // relative paths, so that nothing path-dependent leaks into the outputs
    let p = |name: &str| name.to_string();
    let dump = fixture("dump100.xml").to_string_lossy().into_owned();
    fs::write(dir.join("post.md"), "Then we get x - root2 for the answer. formula: y + py = px - 2p for which value ( s ) of p 1\n")
        .map_err(|e| e.to_string())?;

    let mut stdout = BTreeMap::new();
    stdout.insert("mine".into(), run_cli(dir, &["mine", "--dump", &dump, "--out", &p("pairs.jsonl")])?);
    stdout.insert("rules".into(), run_cli(dir, &["rules", "--corpus", &p("pairs.jsonl"), "--out", &p("rules.jsonl")])?);
    stdout.insert("suggest".into(), run_cli(dir, &["suggest", "--post", &p("post.md"), "--rules", &p("rules.jsonl")])?);
    stdout.insert(
        "suggest-json".into(),
        run_cli(dir, &["suggest", "--post", &p("post.md"), "--rules", &p("rules.jsonl"), "--json"])?,
    );
    stdout.insert(
        "eval-textual".into(),
        run_cli(dir, &[
            "eval", "--track", "textual", "--corpus", &p("pairs.jsonl"), "--rules", &p("rules.jsonl"), "--report",
            &p("textual.json"), "--csv", &p("textual.csv"),
        ])?,
    );

    let mut corpus = String::new();
    let mut candidates = String::new();
    for (i, f) in ["x^{2} + 1", r"\frac{a}{b}", r"\sqrt{n} - 3"].iter().enumerate() {
        let img = format!("img{i}.pbm");
        stdout.insert(format!("render-{i}"), run_cli(dir, &["render", "--formula", f, "--out", &p(&img), "--augment"])?);
        corpus.push_str(&serde_json::json!({"id": i.to_string(), "image": img, "reference": f}).to_string());
        corpus.push('\n');
        for (text, score) in [(f.to_string(), 0.5), (f.replace('x', "y").replace('n', "m"), 0.9)] {
            candidates.push_str(&serde_json::json!({"id": i.to_string(), "text": text, "score": score}).to_string());
            candidates.push('\n');
        }
    }
    stdout.insert("render-png".into(), run_cli(dir, &["render", "--formula", r"\sum_{k=1}^{n} k", "--out", &p("sum.png")])?);
    stdout.insert("render-raw".into(), run_cli(dir, &["render", "--formula", "a^2+b^2", "--out", &p("sq.pbm"), "--raw", "--seed", "3", "--augment"])?);
    fs::write(dir.join("visual.jsonl"), corpus).map_err(|e| e.to_string())?;
    fs::write(dir.join("candidates.jsonl"), candidates).map_err(|e| e.to_string())?;
    stdout.insert(
        "eval-visual".into(),
        run_cli(dir, &[
            "eval", "--track", "visual", "--corpus", &p("visual.jsonl"), "--candidates", &p("candidates.jsonl"),
            "--report", &p("visual.json"), "--csv", &p("visual.csv"),
        ])?,
    );

    let mut all: BTreeMap<String, Vec<u8>> = stdout.into_iter().map(|(k, v)| (format!("stdout:{k}"), v)).collect();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        all.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(all)
}

fn criterion_9() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    ensure(first.keys().eq(second.keys()), || "different file sets".into())?;
    let differing: Vec<&String> = first.iter().filter(|(k, v)| second[*k] != **v).map(|(k, _)| k).collect();
    ensure(differing.is_empty(), || format!("outputs differ: {differing:?}"))?;
    let empty: Vec<&String> = first.iter().filter(|(k, v)| v.is_empty() && !k.starts_with("stdout:render")).map(|(k, _)| k).collect();
    ensure(empty.is_empty(), || format!("empty outputs: {empty:?}"))?;
    Ok(format!("{} outputs byte-identical across two runs", first.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("canonicalization", criterion_1),
        ("mining oracle", criterion_2),
        ("levenshtein equivalence", criterion_3),
        ("normalizer round trip", criterion_4),
        ("rule engine", criterion_5),
        ("image similarity", criterion_6),
        ("re-ranking oracle", criterion_7),
        ("metrics oracle", criterion_8),
        ("determinism", criterion_9),
    ];
    // keep panics from interleaving with the report
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
