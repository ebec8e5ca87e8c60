//! The `latexedit` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use similar::TextDiff;

use crate::edit::{apply_suggestions, mine_rules, read_rules, suggest_edits, write_rules, Candidate, CandidateSource, EditRule, ProcessAdapter, DEFAULT_MIN_SUPPORT};
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::metrics::{evaluate_textual, evaluate_visual, VisualItem};
use crate::miner::{detect_phrases, mine_corpus, parse_dump, EditType, MinerConfig, SentencePair};
use crate::render::{read_image, render, to_png, write_pbm, PbmFormat, RenderError, RenderOptions, GRAY_THRESHOLD};
use crate::service::{router, AppState, Session};

pub const SEED_VAR: &str = "LATEXEDIT_SEED";

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GLYPH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "latexedit", version, about = "Mine, suggest and review LaTeX edits in math posts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Track {
    Textual,
    Visual,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract sentence edit pairs from a post history dump.
    Mine {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        align_threshold: f64,
        #[arg(long, default_value_t = 10)]
        min_chars: usize,
        #[arg(long, default_value_t = 256)]
        max_chars: usize,
        /// Where to write the diagnostics log; defaults to OUT with a
        /// `.diagnostics.txt` suffix.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        #[arg(long)]
        skip_rollbacks: bool,
    },
    /// Learn rewrite rules from a mined corpus.
    Rules {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
        min_support: u64,
    },
    /// List frequent two-word phrases from edit comments.
    Phrases {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long, default_value_t = 10)]
        theta: u64,
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
    },
    /// Suggest edits for one post body.
    Suggest {
        #[arg(long)]
        post: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        json: bool,
        /// Model adapter program speaking the JSON-lines protocol.
        #[arg(long)]
        adapter: Option<String>,
        #[arg(long = "adapter-arg")]
        adapter_args: Vec<String>,
    },
    /// Score the engine on a held-out corpus.
    Eval {
        #[arg(long, value_enum)]
        track: Track,
        #[arg(long)]
        corpus: PathBuf,
        /// Rules for the textual track.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Candidate transcriptions for the visual track.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Render a formula to PBM (or PNG when OUT ends in `.png`).
    Render {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long, default_value_t = 2)]
        padding: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        augment: bool,
        /// Write packed `P4` instead of plain `P1`.
        #[arg(long)]
        raw: bool,
    },
    /// Serve a review session over HTTP.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Directory with the review UI's static files.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    fn failure(message: impl Into<String>) -> Self {
        CliError { code: EXIT_FAILURE, message: message.into() }
    }
}

type CliResult = Result<(), CliError>;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))
}

fn load_rules(path: &Path) -> Result<Vec<EditRule>, CliError> {
    read_rules(open(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_pairs(path: &Path) -> Result<Vec<SentencePair>, CliError> {
    read_jsonl(open(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Seed from the environment, or 0.
pub fn env_seed() -> Result<u64, CliError> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::input(format!("{SEED_VAR} is not an integer: {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn cmd_mine(
    dump: &Path,
    out_path: &Path,
    config: MinerConfig,
    diagnostics: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult {
    config.validate().map_err(CliError::input)?;
    let parsed = parse_dump(open(dump)?).map_err(|e| CliError::input(format!("{}: {e}", dump.display())))?;
    let mined = mine_corpus(&parsed.revisions, &config);

    let mut out = create(out_path)?;
    write_jsonl(&mut out, &mined.pairs).map_err(|e| CliError::failure(e.to_string()))?;
    out.flush().map_err(|e| CliError::failure(e.to_string()))?;

    let diagnostics = diagnostics.unwrap_or_else(|| {
        let mut p = out_path.as_os_str().to_owned();
        p.push(".diagnostics.txt");
        PathBuf::from(p)
    });
    let s = &mined.stats;
    let mut log = parsed.diagnostics();
    log.push_str(&format!(
        "posts: {}\nrevision pairs: {}\nrollbacks skipped: {}\naligned pairs: {}\nkept pairs: {}\n",
        s.posts, s.revision_pairs, s.rollbacks_skipped, s.aligned_pairs, s.kept_pairs
    ));
    fs::write(&diagnostics, log).map_err(|e| CliError::failure(format!("{}: {e}", diagnostics.display())))?;

    let mut counts: BTreeMap<EditType, usize> = EditType::ALL.iter().map(|t| (*t, 0)).collect();
    for pair in &mined.pairs {
        for t in &pair.edit_types {
            *counts.entry(*t).or_default() += 1;
        }
    }
    let mut text = format!("pairs: {}\n", mined.pairs.len());
    for (t, n) in counts {
        text.push_str(&format!("{}: {n}\n", t.as_str()));
    }
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::failure(e.to_string()))
}

fn cmd_rules(corpus: &Path, out_path: &Path, min_support: u64, stdout: &mut dyn Write) -> CliResult {
    let pairs = load_pairs(corpus)?;
    let rules = mine_rules(&pairs, min_support);
    let mut out = create(out_path)?;
    write_rules(&mut out, &rules).map_err(|e| CliError::failure(e.to_string()))?;
    out.flush().map_err(|e| CliError::failure(e.to_string()))?;
    writeln!(stdout, "rules: {}", rules.len()).map_err(|e| CliError::failure(e.to_string()))
}

fn cmd_phrases(dump: &Path, theta: u64, threshold: f64, stdout: &mut dyn Write) -> CliResult {
    let parsed = parse_dump(open(dump)?).map_err(|e| CliError::input(format!("{}: {e}", dump.display())))?;
    let comments: Vec<String> = parsed.revisions.iter().filter_map(|r| r.comment.clone()).collect();
    let mut text = String::new();
    for p in detect_phrases(&comments, theta, threshold) {
        text.push_str(&format!("{} {}\t{}\t{:.3}\n", p.first, p.second, p.count, p.score));
    }
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::failure(e.to_string()))
}

#[derive(Serialize)]
struct SuggestJson<'a> {
    suggestions: &'a [crate::edit::Suggestion],
    diagnostics: &'a [String],
}

fn cmd_suggest(post: &Path, rules_path: &Path, json: bool, adapter: Option<(String, Vec<String>)>, stdout: &mut dyn Write) -> CliResult {
    let body = fs::read_to_string(post).map_err(|e| CliError::input(format!("{}: {e}", post.display())))?;
    let rules = load_rules(rules_path)?;
    let output = match adapter {
        Some((program, args)) => {
            let mut adapter = ProcessAdapter::spawn(&program, &args).map_err(|e| CliError::input(format!("{program}: {e}")))?;
            suggest_edits(&body, &rules, Some(&mut adapter))
        }
        None => suggest_edits(&body, &rules, None),
    }
    .map_err(|e| CliError::failure(e.to_string()))?;

    let text = if json {
        let mut s = serde_json::to_string_pretty(&SuggestJson { suggestions: &output.suggestions, diagnostics: &output.diagnostics })
            .map_err(|e| CliError::failure(e.to_string()))?;
        s.push('\n');
        s
    } else if output.suggestions.is_empty() {
        "no suggestions\n".to_string()
    } else {
        let edited = apply_suggestions(&body, &output.suggestions, |s| Some(&s.suggested));
        let name = post.display().to_string();
        let diff = TextDiff::from_lines(&body, &edited);
        let mut unified = diff.unified_diff();
        unified.header(&name, &name).to_string()
    };
    for d in &output.diagnostics {
        eprintln!("{d}");
    }
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::failure(e.to_string()))
}

#[derive(Debug, Deserialize)]
struct VisualLine {
    id: String,
    image: PathBuf,
    reference: String,
}

#[derive(Debug, Deserialize)]
struct CandidateLine {
    id: String,
    text: String,
    score: f64,
}

fn load_visual(corpus: &Path) -> Result<Vec<VisualItem>, CliError> {
    let lines: Vec<VisualLine> = read_jsonl(open(corpus)?).map_err(|e| CliError::input(format!("{}: {e}", corpus.display())))?;
    let base = corpus.parent().unwrap_or(Path::new("."));
    lines
        .into_iter()
        .map(|l| {
            let path = base.join(&l.image);
            let bytes = fs::read(&path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let image = read_image(&bytes, GRAY_THRESHOLD).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            Ok(VisualItem { id: l.id, image, reference_latex: l.reference })
        })
        .collect()
}

fn cmd_eval(
    track: Track,
    corpus: &Path,
    rules: Option<&Path>,
    candidates: Option<&Path>,
    report_path: &Path,
    csv_path: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult {
    let report = match track {
        Track::Textual => {
            let rules = rules.ok_or_else(|| CliError::input("--rules is required for the textual track"))?;
            let rules = load_rules(rules)?;
            let pairs = load_pairs(corpus)?;
            evaluate_textual(&pairs, &rules, None)
        }
        Track::Visual => {
            let candidates = candidates.ok_or_else(|| CliError::input("--candidates is required for the visual track"))?;
            let items = load_visual(corpus)?;
            let lines: Vec<CandidateLine> =
                read_jsonl(open(candidates)?).map_err(|e| CliError::input(format!("{}: {e}", candidates.display())))?;
            let mut by_id: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
            for l in lines {
                by_id.entry(l.id).or_default().push(Candidate { text: l.text, score: l.score, source: CandidateSource::File });
            }
            evaluate_visual(&items, |item| by_id.get(&item.id).cloned().unwrap_or_default())
        }
    }
    .map_err(|e| CliError::input(e.to_string()))?;

    let mut out = create(report_path)?;
    report.write_json(&mut out).map_err(|e| CliError::failure(e.to_string()))?;
    out.flush().map_err(|e| CliError::failure(e.to_string()))?;
    if let Some(path) = csv_path {
        report.write_csv(create(path)?).map_err(|e| CliError::failure(e.to_string()))?;
    }
    let mut text = format!("examples: {}\nbleu: {:.2}\n", report.n_examples, report.bleu);
    if let Some(g) = report.gleu {
        text.push_str(&format!("gleu: {g:.2}\n"));
    }
    if let Some(s) = report.image_similarity_mean {
        text.push_str(&format!("image similarity: {s:.4}\n"));
    }
    text.push_str(&format!("exact match: {:.4}\n", report.exact_match));
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::failure(e.to_string()))
}

fn cmd_render(formula: &str, out: &Path, options: RenderOptions, raw: bool) -> CliResult {
    let bitmap = render(formula, &options).map_err(|e| match e {
        RenderError::UnsupportedGlyph(_) => CliError { code: EXIT_GLYPH, message: e.to_string() },
        _ => CliError::input(e.to_string()),
    })?;
    let bytes = if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        to_png(&bitmap)
    } else {
        write_pbm(&bitmap, if raw { PbmFormat::Raw } else { PbmFormat::Plain })
    };
    fs::write(out, bytes).map_err(|e| CliError::failure(format!("{}: {e}", out.display())))
}

#[derive(Debug, Deserialize)]
struct PostLine {
    post_id: u64,
    body: String,
}

/// Posts to review: lines of `{post_id, body}`, or a mined corpus whose
/// original sentences are joined per post.
fn load_posts(path: &Path) -> Result<Vec<(u64, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if let Ok(posts) = read_jsonl::<PostLine, _>(text.as_bytes()) {
        return Ok(posts.into_iter().map(|p| (p.post_id, p.body)).collect());
    }
    let pairs: Vec<SentencePair> = read_jsonl(text.as_bytes()).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut posts: BTreeMap<u64, Vec<String>> = BTreeMap::new();
    for p in pairs {
        posts.entry(p.post_id).or_default().push(p.original);
    }
    Ok(posts.into_iter().map(|(id, sentences)| (id, sentences.join(" "))).collect())
}

fn cmd_serve(port: u16, session_path: &Path, corpus: &Path, rules: &Path, ui: Option<&Path>) -> CliResult {
    let session = if session_path.exists() {
        Session::load(session_path).map_err(|e| CliError::input(e.to_string()))?
    } else {
        let rules = load_rules(rules)?;
        let session = Session::create(load_posts(corpus)?, &rules, Utc::now());
        session.save(session_path).map_err(|e| CliError::failure(e.to_string()))?;
        session
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::failure(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .map_err(|e| CliError::input(format!("cannot listen on port {port}: {e}")))?;
        eprintln!("serving {} posts on http://127.0.0.1:{port}", session.posts.len());
        let app = router(AppState::new(session, session_path.to_path_buf()), ui);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::failure(e.to_string()))
    })
}

/// Execute a parsed command, writing its report to `stdout`.
pub fn execute(command: Command, stdout: &mut dyn Write) -> CliResult {
    match command {
        Command::Mine { dump, out, align_threshold, min_chars, max_chars, diagnostics, skip_rollbacks } => {
            let config = MinerConfig { align_threshold, min_chars, max_chars, skip_rollbacks, ..Default::default() };
            cmd_mine(&dump, &out, config, diagnostics, stdout)
        }
        Command::Rules { corpus, out, min_support } => cmd_rules(&corpus, &out, min_support, stdout),
        Command::Phrases { dump, theta, threshold } => cmd_phrases(&dump, theta, threshold, stdout),
        Command::Suggest { post, rules, json, adapter, adapter_args } => {
            cmd_suggest(&post, &rules, json, adapter.map(|a| (a, adapter_args)), stdout)
        }
        Command::Eval { track, corpus, rules, candidates, report, csv } => {
            cmd_eval(track, &corpus, rules.as_deref(), candidates.as_deref(), &report, csv.as_deref(), stdout)
        }
        Command::Render { formula, out, scale, padding, seed, augment, raw } => {
            let seed = match seed {
                Some(s) => s,
                None => env_seed()?,
            };
            cmd_render(&formula, &out, RenderOptions { scale, padding, seed, augment }, raw)
        }
        Command::Serve { port, session, corpus, rules, ui } => cmd_serve(port, &session, &corpus, &rules, ui.as_deref()),
    }
}

/// Parse arguments and run; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("latexedit: {}", e.message);
            e.code
        }
    }
}
