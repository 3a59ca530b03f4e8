use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn sqlsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqlsynth")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sqlsynth"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn samples(dir: &Path) -> Vec<PathBuf> {
    sqlsynth::samples::write_sample_databases(dir).unwrap()
}

#[test]
fn ring_generation_and_template_check() {
    let dir = tempfile::tempdir().unwrap();
    let dbs = samples(dir.path());
    let ring = dir.path().join("ring.json");
    let out = sqlsynth(&["ring-gen", "--db", s(&dbs[0]), "--out", s(&ring)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&ring).unwrap()).unwrap();
    assert!(json["entities"].as_array().is_some_and(|e| !e.is_empty()));

    let out = sqlsynth(&["template-check", "builtin/", "--ring", s(&ring)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let bad = dir.path().join("bad.tpl");
    std::fs::write(&bad, "[template]\nid = x\n\n[slots]\nEntity[0]\n\n[input a]\nretrieve = {Entity[0]}\n\n[questions]\nwhat is {Entity[7].Expression}?\n").unwrap();
    let out = sqlsynth(&["template-check", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generation_is_reproducible_and_summarised() {
    let dir = tempfile::tempdir().unwrap();
    let dbs = samples(dir.path());
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["generate", "--n", "25", "--seed", "4", "--workers", workers, "--out", s(&out)];
        for d in &dbs[..4] {
            args.extend(["--db", s(d)]);
        }
        let o = sqlsynth(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a.jsonl", "1");
    let b = run("b.jsonl", "4");
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 25);
    assert!(a.with_extension("report.json").exists());

    let o = sqlsynth(&["stats", s(&a)]);
    assert!(o.status.success());
    let json_out = dir.path().join("stats.json");
    assert!(sqlsynth(&["stats", s(&a), "--out", s(&json_out)]).status.success());
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(stats["n_records"], 25);

    let r = dir.path().join("r.jsonl");
    let mut args = vec!["rephrase", s(&a), "--mode", "query-only", "--out", s(&r)];
    for d in &dbs[..4] {
        args.extend(["--db", s(d)]);
    }
    let o = sqlsynth(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for line in std::fs::read_to_string(&r).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["question_mode"], "query-only");
        assert!(v["prompt"].as_str().unwrap().contains(v["sql"].as_str().unwrap()));
    }
}

#[test]
fn simplify_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("music.sqlite");
    sqlsynth::samples::write_song_database(&db).unwrap();
    let raw = "SELECT T1.song_name AS x FROM (SELECT song_name, rating FROM song) AS T1 WHERE T1.rating > 5;";
    let o = with_stdin(&["simplify", "--verify", "--db", s(&db)], raw);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.trim().len() < raw.len() && out.trim().starts_with("select"), "{out}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("equivalent"));
}

#[test]
fn exit_codes() {
    let o = sqlsynth(&["generate", "--question-mode", "sometimes", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sqlsynth(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    let o = sqlsynth(&["ring-gen", "--db", "/nonexistent/db.sqlite", "--out", "/tmp/never.json"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"));

    let o = with_stdin(&["simplify"], "select from where");
    assert_eq!(o.status.code(), Some(1));
}
