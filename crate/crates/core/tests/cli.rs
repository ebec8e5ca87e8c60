use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latexedit")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const RULES: &str = r#"{"lhs":["root","2"],"rhs":["\\sqrt","{","2","}"],"support":3}"#;

#[test]
fn missing_dump_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["mine", "--dump", "nope.xml", "--out", "pairs.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn empty_dump_mines_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.xml"), "<?xml version=\"1.0\"?>\n<posthistory>\n</posthistory>\n").unwrap();
    let out = cli(dir.path(), &["mine", "--dump", "empty.xml", "--out", "pairs.jsonl"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("pairs: 0"));
    assert_eq!(fs::read_to_string(dir.path().join("pairs.jsonl")).unwrap(), "");
    assert!(dir.path().join("pairs.jsonl.diagnostics.txt").exists());
}

#[test]
fn bad_rules_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("post.md"), "x - root2.").unwrap();
    fs::write(dir.path().join("rules.jsonl"), "{not json}\n").unwrap();
    let out = cli(dir.path(), &["suggest", "--post", "post.md", "--rules", "rules.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn clean_post_has_no_suggestions() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("post.md"), "Nothing to fix in this post.").unwrap();
    fs::write(dir.path().join("rules.jsonl"), format!("{RULES}\n")).unwrap();
    let out = cli(dir.path(), &["suggest", "--post", "post.md", "--rules", "rules.jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "no suggestions");
}

#[test]
fn suggest_prints_diff_and_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("post.md"), "We get x - root2 here.\n").unwrap();
    fs::write(dir.path().join("rules.jsonl"), format!("{RULES}\n")).unwrap();
    let out = cli(dir.path(), &["suggest", "--post", "post.md", "--rules", "rules.jsonl"]);
    let text = stdout(&out);
    assert!(text.contains("-We get x - root2 here."), "{text}");
    assert!(text.contains(r"+We get $x-\sqrt{2}$ here."), "{text}");
    let out = cli(dir.path(), &["suggest", "--post", "post.md", "--rules", "rules.jsonl", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suggestions"][0]["suggested"], r"We get $x-\sqrt{2}$ here.");
}

#[test]
fn unsupported_glyph_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["render", "--formula", r"\gamma", "--out", "g.pbm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("g.pbm").exists());
}

#[test]
fn render_writes_pbm_and_png() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cli(dir.path(), &["render", "--formula", r"\frac{1}{2}", "--out", "f.pbm"]).status.success());
    assert!(fs::read_to_string(dir.path().join("f.pbm")).unwrap().starts_with("P1\n"));
    assert!(cli(dir.path(), &["render", "--formula", "x^2", "--out", "f.png"]).status.success());
    assert_eq!(&fs::read(dir.path().join("f.png")).unwrap()[..4], b"\x89PNG");
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(dir.path(), &["mine", "--bogus"]).status.code(), Some(2));
}

#[test]
fn eval_textual_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let pair = serde_json::json!({
        "original": "We get x - root2 here.", "edited": r"We get $x-\sqrt{2}$ here.", "similarity": 0.8, "post_id": 1
    });
    fs::write(dir.path().join("pairs.jsonl"), format!("{pair}\n")).unwrap();
    fs::write(dir.path().join("rules.jsonl"), format!("{RULES}\n")).unwrap();
    let out = cli(
        dir.path(),
        &["eval", "--track", "textual", "--corpus", "pairs.jsonl", "--rules", "rules.jsonl", "--report", "r.json", "--csv", "r.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["bleu"], 100.0);
    assert_eq!(report["n_examples"], 1);
    assert!(fs::read_to_string(dir.path().join("r.csv")).unwrap().starts_with("id,"));
}
