use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn biasaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biasaudit"))
        .args(args)
        .arg("--blacklist")
        .arg(data("blacklist.json"))
        .arg("--stopwords")
        .arg(data("stopwords_en.txt"))
        .arg("--lexicon")
        .arg(data("vader_lexicon.tsv"))
        .arg("--corpus")
        .arg(data("fixtures/synthetic_corpus.jsonl"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn audit_writes_three_outlet_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = biasaudit(&["audit", "--deterministic", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("outlet"));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["outlets"].as_object().unwrap().len(), 3);
    assert!(summary.get("generated_at").is_none());
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"].as_array().unwrap().len(), 13);
}

#[test]
fn timestamp_present_without_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = biasaudit(&["audit", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["generated_at"].is_string());
}

#[test]
fn missing_blacklist_exits_2_with_path() {
    let out = Command::new(env!("CARGO_BIN_EXE_biasaudit"))
        .args(["audit", "--blacklist", "/no/such/blacklist.json", "--corpus"])
        .arg(data("fixtures/synthetic_corpus.jsonl"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/no/such/blacklist.json"));
}

#[test]
fn malformed_corpus_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    fs::write(&corpus, "{\"id\": 1}\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_biasaudit"))
        .args(["stats", "--blacklist"])
        .arg(data("blacklist.json"))
        .arg("--stopwords")
        .arg(data("stopwords_en.txt"))
        .arg("--lexicon")
        .arg(data("vader_lexicon.tsv"))
        .arg("--corpus")
        .arg(&corpus)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("corpus: line 1"), "{}", stderr(&out));
}

#[test]
fn outlet_filter_emits_only_that_outlet() {
    let dir = tempfile::tempdir().unwrap();
    let out = biasaudit(&[
        "audit",
        "--deterministic",
        "--outlet",
        "quanta_like",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let outlets: Vec<&String> = summary["outlets"].as_object().unwrap().keys().collect();
    assert_eq!(outlets, ["quanta_like"]);
    assert!(!dir.path().join("wired_like").exists());

    let bad = biasaudit(&["stats", "--outlet", "nowhere"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn stage_commands_print_json() {
    for (cmd, key) in [
        ("stats", "outlets"),
        ("bias", "quanta_like"),
        ("topics", "wired_like"),
        ("sentiment", "newsci_like"),
    ] {
        let out = biasaudit(&[cmd]);
        assert!(out.status.success(), "{cmd}: {}", stderr(&out));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v.get(key).is_some(), "{cmd}");
    }
}

#[test]
fn date_filter_narrows_corpus() {
    let all = biasaudit(&["stats"]);
    let some = biasaudit(&["stats", "--from", "2018-01-01", "--to", "2019-12-31"]);
    let total = |o: &Output| {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["pooled"]["total"].as_u64().unwrap()
    };
    assert!(total(&some) < total(&all));
    let reversed = biasaudit(&["stats", "--from", "2019-01-01", "--to", "2018-01-01"]);
    assert_eq!(reversed.status.code(), Some(2));
}

#[test]
fn per_outlet_maps_are_written_separately() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    let out = biasaudit(&["anonmap", "--per-outlet-anon", "--map-dir", maps.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for outlet in ["quanta_like", "wired_like", "newsci_like"] {
        let text = fs::read_to_string(maps.join(format!("anon_map_{outlet}.csv"))).unwrap();
        assert_eq!(text.lines().next(), Some("author,alias"));
        assert_eq!(text.lines().count(), 13);
    }
}

#[test]
fn alias_map_refused_inside_report_dir() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().to_str().unwrap();
    let inside = dir.path().join("maps");
    let out = biasaudit(&["anonmap", "--out", reports, "--map-dir", inside.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!inside.join("anon_map.csv").exists());
}

#[test]
fn synth_reproduces_bundled_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let out = Command::new(env!("CARGO_BIN_EXE_biasaudit"))
        .args(["synth", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        fs::read(&path).unwrap(),
        fs::read(data("fixtures/synthetic_corpus.jsonl")).unwrap()
    );
}
