//! Title-level topic frequencies and sentiment distributions.

mod sentiment;

pub use sentiment::{Lexicon, LexiconError, SentimentAnalyzer, SentimentScore};

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot read stopwords {path}: {source}")]
    Stopwords {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("minimum token length must be at least 1")]
    ZeroMinLen,
    #[error("no sentiment scores to summarise")]
    EmptyScores,
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>, TextError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TextError::Stopwords {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect())
}

#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
    min_len: usize,
    whitelist: BTreeSet<String>,
}

impl Tokenizer {
    pub fn new(stopwords: BTreeSet<String>, min_len: usize, whitelist: BTreeSet<String>) -> Result<Self, TextError> {
        if min_len == 0 {
            return Err(TextError::ZeroMinLen);
        }
        let whitelist = whitelist.into_iter().map(|w| w.to_lowercase()).collect();
        Ok(Self {
            stopwords,
            min_len,
            whitelist,
        })
    }

    /// Three-character minimum, no whitelist.
    pub fn with_stopwords(stopwords: BTreeSet<String>) -> Self {
        Self {
            stopwords,
            min_len: 3,
            whitelist: BTreeSet::new(),
        }
    }

    /// Lowercases, splits on non-alphanumeric characters and drops stopwords
    /// and short tokens. Whitelisted tokens are always kept.
    pub fn tokenize(&self, title: &str) -> Vec<String> {
        title
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|tok| !tok.is_empty())
            .filter(|tok| {
                self.whitelist.contains(*tok) || (tok.chars().count() >= self.min_len && !self.stopwords.contains(*tok))
            })
            .map(str::to_string)
            .collect()
    }
}

pub fn tokenize_title(
    title: &str,
    stopwords: &BTreeSet<String>,
    min_len: usize,
    whitelist: &BTreeSet<String>,
) -> Result<Vec<String>, TextError> {
    Ok(Tokenizer::new(stopwords.clone(), min_len, whitelist.clone())?.tokenize(title))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFrequency {
    pub term: String,
    pub count: u64,
}

/// Top `k` terms over all titles, ties broken alphabetically.
pub fn term_frequencies<S: AsRef<str>>(tokenizer: &Tokenizer, titles: &[S], k: usize) -> Vec<TermFrequency> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for title in titles {
        for tok in tokenizer.tokenize(title.as_ref()) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut terms: Vec<TermFrequency> = counts
        .into_iter()
        .map(|(term, count)| TermFrequency { term, count })
        .collect();
    terms.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    terms.truncate(k);
    terms
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Linear interpolation between order statistics at position `(n - 1) p`.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats, TextError> {
    if values.is_empty() {
        return Err(TextError::EmptyScores);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(BoxplotStats {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
    })
}

pub fn sentiment_distribution(scores: &[SentimentScore]) -> Result<BoxplotStats, TextError> {
    let compounds: Vec<f64> = scores.iter().map(|s| s.compound).collect();
    boxplot_stats(&compounds)
}
