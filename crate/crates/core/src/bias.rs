//! Journalist repetition bias, top-k concentration and co-mention edges.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anonymize::AnonymizationMap;
use crate::corpus::Article;
use crate::names::{Blacklist, PersonKey};
use crate::stats::{resolve_mentions, MentionLedger};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BiasError {
    #[error("ledger is empty")]
    EmptyLedger,
    #[error("k must be at least 1")]
    ZeroK,
}

/// Thresholds for flagging an author/person pair. Both comparisons are strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagRule {
    pub articles_over: usize,
    pub mentions_over: u64,
}

impl Default for FlagRule {
    fn default() -> Self {
        Self {
            articles_over: 5,
            mentions_over: 15,
        }
    }
}

impl FlagRule {
    pub fn flags(&self, article_count: usize, cumulative_mentions: u64) -> bool {
        article_count > self.articles_over && cumulative_mentions > self.mentions_over
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub author: String,
    pub person: PersonKey,
    pub article_count: usize,
    pub cumulative_mentions: u64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorBiasProfile {
    pub author: String,
    /// Herfindahl–Hirschman index of the author's person-mention shares.
    pub hhi: f64,
    /// Sorted by cumulative mentions descending, then person.
    pub records: Vec<RepetitionRecord>,
}

impl AuthorBiasProfile {
    pub fn flagged_count(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }
}

/// Sum of squared shares.
pub fn hhi(weights: &[u64]) -> f64 {
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    weights.iter().map(|&w| (w as f64 / total).powi(2)).sum()
}

/// One profile per author alias in the ledger, in alias order.
pub fn repetition_index(ledger: &MentionLedger, rule: FlagRule) -> Vec<AuthorBiasProfile> {
    let mut by_author: BTreeMap<&str, Vec<RepetitionRecord>> = BTreeMap::new();
    for ((author, person), tally) in &ledger.author_person {
        by_author.entry(author).or_default().push(RepetitionRecord {
            author: author.clone(),
            person: person.clone(),
            article_count: tally.articles.len(),
            cumulative_mentions: tally.mentions,
            flagged: rule.flags(tally.articles.len(), tally.mentions),
        });
    }
    by_author
        .into_iter()
        .map(|(author, mut records)| {
            records.sort_by(|a, b| {
                b.cumulative_mentions
                    .cmp(&a.cumulative_mentions)
                    .then_with(|| a.person.cmp(&b.person))
            });
            let weights: Vec<u64> = records.iter().map(|r| r.cumulative_mentions).collect();
            AuthorBiasProfile {
                author: author.to_string(),
                hhi: hhi(&weights),
                records,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopEntry {
    pub rank: usize,
    pub person: PersonKey,
    pub count: u64,
    /// Percentage of the summed top-k counts, full precision.
    pub share_pct: f64,
}

impl TopEntry {
    /// Share rounded half-up to two decimals, for display.
    pub fn share_display(&self) -> String {
        format!("{:.2}", round_half_up_2(self.share_pct))
    }
}

fn round_half_up_2(x: f64) -> f64 {
    // shares are non-negative so round() (half away from zero) is half-up
    (x * 100.0).round() / 100.0
}

pub fn top_mentioned(ledger: &MentionLedger, k: usize) -> Result<Vec<TopEntry>, BiasError> {
    if k == 0 {
        return Err(BiasError::ZeroK);
    }
    if ledger.is_empty() {
        return Err(BiasError::EmptyLedger);
    }
    let top: Vec<_> = ledger.ranked().into_iter().take(k).collect();
    let sum: u64 = top.iter().map(|(_, c)| c).sum();
    Ok(top
        .into_iter()
        .enumerate()
        .map(|(i, (person, count))| TopEntry {
            rank: i + 1,
            person: person.clone(),
            count,
            share_pct: 100.0 * count as f64 / sum as f64,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoMentionEdge {
    pub person_a: PersonKey,
    pub person_b: PersonKey,
    pub weight: u64,
}

/// Presence-based co-mention weights: each article adds one to every unordered
/// pair of distinct surviving persons. Sorted by weight descending, then pair.
pub fn co_mention_edges(articles: &[Article], blacklist: &Blacklist, map: &AnonymizationMap) -> Vec<CoMentionEdge> {
    let mut weights: BTreeMap<(PersonKey, PersonKey), u64> = BTreeMap::new();
    for article in articles {
        let persons: BTreeSet<PersonKey> = resolve_mentions(article, blacklist, map).into_keys().collect();
        let persons: Vec<_> = persons.into_iter().collect();
        for (i, a) in persons.iter().enumerate() {
            for b in &persons[i + 1..] {
                *weights.entry((a.clone(), b.clone())).or_insert(0) += 1;
            }
        }
    }
    let mut edges: Vec<CoMentionEdge> = weights
        .into_iter()
        .map(|((person_a, person_b), weight)| CoMentionEdge {
            person_a,
            person_b,
            weight,
        })
        .collect();
    edges.sort_by(|x, y| {
        y.weight
            .cmp(&x.weight)
            .then_with(|| x.person_a.cmp(&y.person_a))
            .then_with(|| x.person_b.cmp(&y.person_b))
    });
    edges
}
