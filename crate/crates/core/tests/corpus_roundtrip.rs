use std::io::Cursor;

use biasaudit::corpus::{load_corpus, read_corpus, LoadMode};
use biasaudit::fixture::{generate, FixtureSpec};

#[test]
fn fixture_survives_write_and_reload() {
    let corpus = generate(FixtureSpec::default());
    let mut bytes = Vec::new();
    corpus.write_jsonl(&mut bytes).unwrap();
    let back = read_corpus(Cursor::new(&bytes), LoadMode::Strict).unwrap();
    assert_eq!(back.skip_count(), 0);
    assert_eq!(back.corpus.articles(), corpus.articles());
}

#[test]
fn bundled_fixture_matches_generator() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/fixtures/synthetic_corpus.jsonl"
    );
    let bundled = load_corpus(path, LoadMode::Strict).unwrap();
    assert_eq!(bundled.corpus.articles(), generate(FixtureSpec::default()).articles());
}

#[test]
fn lenient_mode_skips_only_bad_lines() {
    let corpus = generate(FixtureSpec {
        articles_per_outlet: 5,
        ..Default::default()
    });
    let mut bytes = Vec::new();
    corpus.write_jsonl(&mut bytes).unwrap();
    bytes.extend_from_slice(b"{not json}\n\n{\"id\":\"x\"}\n");
    assert!(read_corpus(Cursor::new(&bytes), LoadMode::Strict).is_err());
    let out = read_corpus(Cursor::new(&bytes), LoadMode::Lenient).unwrap();
    assert_eq!(out.corpus.len(), 15);
    assert_eq!(out.skip_count(), 2);
}
