//! Article records and JSON-Lines corpus ingestion.
//!
//! Each non-blank line of a corpus file is one article object:
//!
//! ```text
//! {"id": "w-0001", "outlet": "wired", "title": "...", "authors": ["..."],
//!  "date": "2021-03-04", "mention_counts": {"Jane Doe": 3}, "url": "..."}
//! ```
//!
//! `url` is optional, every other field is required. Unknown fields are ignored.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

const REQUIRED_FIELDS: [&str; 6] = ["id", "outlet", "title", "authors", "date", "mention_counts"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub outlet: String,
    pub title: String,
    pub authors: Vec<String>,
    pub date: NaiveDate,
    /// Raw person name as extracted upstream, mapped to its in-article count.
    pub mention_counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

/// An immutable, validated collection of articles in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    articles: Vec<Article>,
    outlets: BTreeSet<String>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate article ids.
    pub fn new(articles: Vec<Article>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(articles.len());
        for (idx, article) in articles.iter().enumerate() {
            if !seen.insert(article.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    line: idx as u64 + 1,
                    id: article.id.clone(),
                });
            }
        }
        let outlets = articles.iter().map(|a| a.outlet.clone()).collect();
        Ok(Self { articles, outlets })
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn outlets(&self) -> &BTreeSet<String> {
        &self.outlets
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Returns a new corpus holding only the articles accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Article) -> bool) -> Corpus {
        let articles: Vec<Article> = self.articles.iter().filter(|a| keep(a)).cloned().collect();
        let outlets = articles.iter().map(|a| a.outlet.clone()).collect();
        Corpus { articles, outlets }
    }

    /// Serialises the corpus as JSON Lines, one article per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for article in &self.articles {
            serde_json::to_writer(&mut out, article)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Any invalid line aborts the load.
    #[default]
    Strict,
    /// Invalid lines are skipped and reported; duplicate ids still abort.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    pub skipped: Vec<SkippedLine>,
}

impl LoadOutcome {
    pub fn skip_count(&self) -> usize {
        self.skipped.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("invalid JSON: {0}")]
    InvalidJson(String),
    #[error("record must be a JSON object")]
    NotObject,
    #[error("missing required field '{0}'")]
    MissingField(&'static str),
    #[error("field '{field}': {reason}")]
    InvalidField { field: String, reason: String },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {kind}")]
    BadLine { line: u64, kind: LineError },
    #[error("line {line}: duplicate article id '{id}'")]
    DuplicateId { line: u64, id: String },
}

/// Loads a JSON-Lines corpus from `path`.
pub fn load_corpus(path: impl AsRef<Path>, mode: LoadMode) -> Result<LoadOutcome, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    read_corpus(BufReader::new(file), mode).map_err(|err| match err {
        CorpusError::Unreadable { source, .. } => CorpusError::Unreadable {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Reads a JSON-Lines corpus from any buffered reader.
pub fn read_corpus<R: BufRead>(mut input: R, mode: LoadMode) -> Result<LoadOutcome, CorpusError> {
    let mut articles = Vec::new();
    let mut skipped = Vec::new();
    let mut ids: HashSet<String> = HashSet::new();
    let mut line = String::new();
    let mut line_no: u64 = 0;

    loop {
        line.clear();
        let read = input.read_line(&mut line).map_err(|source| CorpusError::Unreadable {
            path: PathBuf::new(),
            source,
        })?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match parse_article(trimmed) {
            Ok(article) => {
                if !ids.insert(article.id.clone()) {
                    return Err(CorpusError::DuplicateId {
                        line: line_no,
                        id: article.id,
                    });
                }
                articles.push(article);
            }
            Err(kind) => match mode {
                LoadMode::Strict => return Err(CorpusError::BadLine { line: line_no, kind }),
                LoadMode::Lenient => skipped.push(SkippedLine {
                    line: line_no,
                    reason: kind.to_string(),
                }),
            },
        }
    }

    let outlets = articles.iter().map(|a| a.outlet.clone()).collect();
    Ok(LoadOutcome {
        corpus: Corpus { articles, outlets },
        skipped,
    })
}

/// Parses and validates a single JSON object line.
pub fn parse_article(line: &str) -> Result<Article, LineError> {
    let value: Value = serde_json::from_str(line).map_err(|e| LineError::InvalidJson(e.to_string()))?;
    let obj = value.as_object().ok_or(LineError::NotObject)?;
    for field in REQUIRED_FIELDS {
        if obj.get(field).is_none_or(Value::is_null) {
            return Err(LineError::MissingField(field));
        }
    }

    let id = non_empty_string(obj, "id")?;
    let outlet = non_empty_string(obj, "outlet")?;
    let title = string_field(obj, "title")?;
    let authors = authors_field(obj)?;
    let date_raw = string_field(obj, "date")?;
    let date = NaiveDate::parse_from_str(&date_raw, "%Y-%m-%d").map_err(|e| LineError::InvalidField {
        field: "date".into(),
        reason: format!("'{date_raw}' is not a YYYY-MM-DD calendar date ({e})"),
    })?;
    let mention_counts = mention_counts_field(obj)?;
    let url = match obj.get("url") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            return Err(LineError::InvalidField {
                field: "url".into(),
                reason: "must be a string".into(),
            })
        }
    };

    Ok(Article {
        id,
        outlet,
        title,
        authors,
        date,
        mention_counts,
        url,
    })
}

fn string_field(obj: &Map<String, Value>, field: &str) -> Result<String, LineError> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        _ => Err(LineError::InvalidField {
            field: field.into(),
            reason: "must be a string".into(),
        }),
    }
}

fn non_empty_string(obj: &Map<String, Value>, field: &str) -> Result<String, LineError> {
    let s = string_field(obj, field)?;
    if s.trim().is_empty() {
        return Err(LineError::InvalidField {
            field: field.into(),
            reason: "must not be empty".into(),
        });
    }
    Ok(s)
}

fn authors_field(obj: &Map<String, Value>) -> Result<Vec<String>, LineError> {
    let Some(Value::Array(items)) = obj.get("authors") else {
        return Err(LineError::InvalidField {
            field: "authors".into(),
            reason: "must be an array of strings".into(),
        });
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| match item {
            Value::String(s) if crate::names::clean_name(s).is_ok() => Ok(s.clone()),
            Value::String(s) => Err(LineError::InvalidField {
                field: format!("authors[{i}]"),
                reason: format!("'{s}' is not a usable byline name"),
            }),
            _ => Err(LineError::InvalidField {
                field: format!("authors[{i}]"),
                reason: "must be a string".into(),
            }),
        })
        .collect()
}

fn mention_counts_field(obj: &Map<String, Value>) -> Result<BTreeMap<String, u64>, LineError> {
    let Some(Value::Object(map)) = obj.get("mention_counts") else {
        return Err(LineError::InvalidField {
            field: "mention_counts".into(),
            reason: "must be an object of name -> count".into(),
        });
    };
    let mut counts = BTreeMap::new();
    for (name, raw) in map {
        let field = || format!("mention_counts[{name:?}]");
        let count = match raw {
            Value::Number(n) => n.as_i64().ok_or_else(|| LineError::InvalidField {
                field: field(),
                reason: format!("count {n} is not an integer"),
            })?,
            _ => {
                return Err(LineError::InvalidField {
                    field: field(),
                    reason: "count must be an integer".into(),
                })
            }
        };
        if count < 1 {
            return Err(LineError::InvalidField {
                field: field(),
                reason: format!("count must be >= 1, got {count}"),
            });
        }
        counts.insert(name.clone(), count as u64);
    }
    Ok(counts)
}

/// Groups articles by outlet, preserving file order within each group.
pub fn partition_by_outlet(corpus: &Corpus) -> BTreeMap<String, Vec<Article>> {
    let mut parts: BTreeMap<String, Vec<Article>> = BTreeMap::new();
    for article in corpus.articles() {
        parts.entry(article.outlet.clone()).or_default().push(article.clone());
    }
    parts
}
