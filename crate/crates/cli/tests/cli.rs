use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_subtok"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(input) = stdin {
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn normalize_reads_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("norm.json");
    fs::write(&cfg, r#"{"lowercase_latin": true, "collapse_whitespace": true, "numeral_target": "Devanagari"}"#).unwrap();
    let out = run(&["normalize", "--config", p(&cfg)], Some("Hello   World 42\nकहा\n"));
    assert!(out.status.success());
    assert_eq!(stdout(&out), "hello world ४२\nकहा\n");
}

#[test]
fn train_encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus.txt");
    for (algo, size_flag, size) in [
        ("bpe", "--merges", "300"),
        ("wordpiece", "--vocab-size", "500"),
        ("sentencepiece", "--vocab-size", "500"),
    ] {
        let model = dir.path().join(algo);
        let out = run(
            &["train", "--algo", algo, size_flag, size, "--in", p(&corpus), "--out", p(&model)],
            None,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = "उन्होंने कहा , अब हमारे पास 4 महीने हैं\nthe village law\n";
        let encoded = run(&["encode", "--model", p(&model)], Some(text));
        assert!(encoded.status.success());
        let decoded = run(&["decode", "--model", p(&model)], Some(&stdout(&encoded)));
        assert_eq!(stdout(&decoded), text, "{algo}");
    }
}

#[test]
fn score_prints_requested_metric() {
    let exp = fixtures().join("experiment");
    let out = run(
        &[
            "score",
            "--hyp",
            p(&exp.join("hyp.hi-en.txt")),
            "--ref",
            p(&exp.join("test.en")),
            "--metric",
            "bleu",
        ],
        None,
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bleu"], 100.0);
    assert!(v.get("ter").is_none());
    assert_eq!(v["segments"], 100);
}

#[test]
fn stats_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "ab ab\n").unwrap();
    let model = dir.path().join("m");
    let out = run(
        &[
            "train", "--algo", "sentencepiece", "--vocab-size", "3", "--model-type", "character",
            "--in", p(&corpus), "--out", p(&model),
        ],
        None,
    );
    assert!(out.status.success());
    let out = run(&["stats", "--model", p(&model), "--in", p(&corpus)], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tokens"], 6);
    assert_eq!(v["words"], 2);
    assert_eq!(v["fertility"], 3.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // config errors
    let bad_cfg = d.join("bad.json");
    fs::write(&bad_cfg, r#"{"schema": "subtok-exp v0", "tokenizers": [], "directions": []}"#).unwrap();
    let out = run(&["compare", "--config", p(&bad_cfg), "--out-dir", p(&d.join("o"))], None);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["train", "--algo", "wordpiece", "--in", "x", "--out", "y"], None);
    assert_eq!(out.status.code(), Some(2));
    let tiny = d.join("tiny.txt");
    fs::write(&tiny, "abc abd\n").unwrap();
    let out = run(
        &["train", "--algo", "sentencepiece", "--vocab-size", "2", "--in", p(&tiny), "--out", p(&d.join("m"))],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    // data errors
    let a = d.join("a.txt");
    let b = d.join("b.txt");
    fs::write(&a, "x\ny\n").unwrap();
    fs::write(&b, "x\n").unwrap();
    let out = run(&["score", "--hyp", p(&a), "--ref", p(&b)], None);
    assert_eq!(out.status.code(), Some(3));
    let bin = d.join("bin.txt");
    fs::write(&bin, b"ok\n\xfe\xff\n").unwrap();
    let out = run(&["train", "--algo", "bpe", "--merges", "3", "--in", p(&bin), "--out", p(&d.join("m2"))], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 3"));
    let out = run(&["encode", "--model", p(&d.join("missing"))], Some("a\n"));
    assert_eq!(out.status.code(), Some(3));
    let cfg = d.join("exp.json");
    fs::write(
        &cfg,
        r#"{"schema":"subtok-exp v1","tokenizers":[{"algo":"bpe","merges":5}],
            "directions":[{"source_lang":"EN","target_lang":"HI","train_source":"a.txt","train_target":"b.txt",
            "test_source":"a.txt","test_target":"a.txt"}]}"#,
    )
    .unwrap();
    let out = run(&["compare", "--config", p(&cfg), "--out-dir", p(&d.join("o"))], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EN-HI: line count mismatch"));
    fs::write(
        &cfg,
        r#"{"schema":"subtok-exp v1","tokenizers":[{"algo":"bpe","merges":5}],
            "directions":[{"source_lang":"EN","target_lang":"HI","train_source":"a.txt","train_target":"a.txt",
            "test_source":"a.txt","test_target":"a.txt","hypotheses":{"bpe":"b.txt"}}]}"#,
    )
    .unwrap();
    let out = run(&["compare", "--config", p(&cfg), "--out-dir", p(&d.join("o"))], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bpe EN-HI"));
}
