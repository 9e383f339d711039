//! Per-outlet mention ledgers and the distributional statistics computed on them.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anonymize::{apply_anonymization, AnonymizationMap};
use crate::corpus::Article;
use crate::names::{clean_mentions, filter_mentions, Blacklist, PersonKey};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("input is empty")]
    Empty,
    #[error("value at position {index} is {value}; counts must be positive and finite")]
    NonPositive { index: usize, value: f64 },
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("values have zero variance")]
    ZeroVariance,
    #[error("trim fraction {0} outside [0, 1)")]
    InvalidFraction(f64),
    #[error("nothing left after trimming {trimmed} of {n} values")]
    EmptyAfterTrim { trimmed: usize, n: usize },
    #[error("ledger mixes outlets '{expected}' and '{found}'")]
    MixedOutlets { expected: String, found: String },
    #[error("article '{article}' has a byline without an alias")]
    UnmappedAuthor { article: String },
}

/// One author's running tally for one person.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorPersonTally {
    pub articles: BTreeSet<String>,
    pub mentions: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionLedger {
    pub outlet: String,
    pub person_totals: BTreeMap<PersonKey, u64>,
    pub person_articles: BTreeMap<PersonKey, BTreeSet<String>>,
    /// Keyed by (author alias, person). Every byline author of an article is
    /// credited with its full counts.
    pub author_person: BTreeMap<(String, PersonKey), AuthorPersonTally>,
}

impl MentionLedger {
    pub fn new(outlet: impl Into<String>) -> Self {
        Self {
            outlet: outlet.into(),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.person_totals.is_empty()
    }

    pub fn total_mentions(&self) -> u64 {
        self.person_totals.values().sum()
    }

    fn record(&mut self, article_id: &str, authors: &[String], mentions: &BTreeMap<PersonKey, u64>) {
        for (person, &count) in mentions {
            *self.person_totals.entry(person.clone()).or_insert(0) += count;
            self.person_articles
                .entry(person.clone())
                .or_default()
                .insert(article_id.to_string());
            for author in authors {
                let tally = self.author_person.entry((author.clone(), person.clone())).or_default();
                tally.articles.insert(article_id.to_string());
                tally.mentions += count;
            }
        }
    }

    /// Combines two ledgers of the same outlet. A ledger with an empty outlet
    /// name and no data acts as the identity.
    pub fn merge(mut self, other: MentionLedger) -> Result<MentionLedger, StatsError> {
        if self.outlet.is_empty() && self.is_empty() && self.author_person.is_empty() {
            self.outlet = other.outlet.clone();
        } else if !(other.outlet.is_empty() && other.is_empty()) && other.outlet != self.outlet {
            return Err(StatsError::MixedOutlets {
                expected: self.outlet,
                found: other.outlet,
            });
        }
        for (person, count) in other.person_totals {
            *self.person_totals.entry(person).or_insert(0) += count;
        }
        for (person, ids) in other.person_articles {
            self.person_articles.entry(person).or_default().extend(ids);
        }
        for (key, tally) in other.author_person {
            let mine = self.author_person.entry(key).or_default();
            mine.articles.extend(tally.articles);
            mine.mentions += tally.mentions;
        }
        Ok(self)
    }

    /// Persons ordered by count descending, ties by name.
    pub fn ranked(&self) -> Vec<(&PersonKey, u64)> {
        let mut ranked: Vec<_> = self.person_totals.iter().map(|(p, &c)| (p, c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked
    }

    pub fn counts(&self) -> Vec<u64> {
        self.person_totals.values().copied().collect()
    }
}

/// Cleaned, filtered and anonymised person counts for a single article.
pub fn resolve_mentions(article: &Article, blacklist: &Blacklist, map: &AnonymizationMap) -> BTreeMap<PersonKey, u64> {
    let cleaned = clean_mentions(&article.mention_counts);
    let filtered = filter_mentions(&cleaned, blacklist);
    apply_anonymization(&filtered, map)
}

fn author_aliases(article: &Article, map: &AnonymizationMap) -> Result<Vec<String>, StatsError> {
    let mut aliases: Vec<String> = article
        .authors
        .iter()
        .map(|a| {
            map.alias_of(a)
                .map(str::to_string)
                .ok_or_else(|| StatsError::UnmappedAuthor {
                    article: article.id.clone(),
                })
        })
        .collect::<Result<_, _>>()?;
    aliases.sort();
    aliases.dedup();
    Ok(aliases)
}

fn article_ledger(
    article: &Article,
    blacklist: &Blacklist,
    map: &AnonymizationMap,
) -> Result<MentionLedger, StatsError> {
    let mut ledger = MentionLedger::new(article.outlet.clone());
    let authors = author_aliases(article, map)?;
    ledger.record(&article.id, &authors, &resolve_mentions(article, blacklist, map));
    Ok(ledger)
}

fn check_single_outlet(articles: &[Article]) -> Result<&str, StatsError> {
    let Some(first) = articles.first() else {
        return Ok("");
    };
    if let Some(other) = articles.iter().find(|a| a.outlet != first.outlet) {
        return Err(StatsError::MixedOutlets {
            expected: first.outlet.clone(),
            found: other.outlet.clone(),
        });
    }
    Ok(&first.outlet)
}

/// Sums filtered, anonymised mentions over articles of a single outlet.
pub fn aggregate(
    articles: &[Article],
    blacklist: &Blacklist,
    map: &AnonymizationMap,
) -> Result<MentionLedger, StatsError> {
    let outlet = check_single_outlet(articles)?;
    let mut ledger = MentionLedger::new(outlet);
    for article in articles {
        let authors = author_aliases(article, map)?;
        ledger.record(&article.id, &authors, &resolve_mentions(article, blacklist, map));
    }
    Ok(ledger)
}

/// Same result as [`aggregate`], built from per-article ledgers in parallel.
pub fn aggregate_par(
    articles: &[Article],
    blacklist: &Blacklist,
    map: &AnonymizationMap,
) -> Result<MentionLedger, StatsError> {
    let outlet = check_single_outlet(articles)?.to_string();
    articles
        .par_iter()
        .map(|a| article_ledger(a, blacklist, map))
        .try_reduce(MentionLedger::default, |a, b| a.merge(b))
        .map(|mut ledger| {
            ledger.outlet = outlet;
            ledger
        })
}

fn validate_positive(values: &[f64]) -> Result<(), StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(StatsError::NonPositive { index, value });
    }
    Ok(())
}

fn sorted_ascending(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

fn gini_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    2.0 * weighted / (n * total) - (n + 1.0) / n
}

/// Gini coefficient of strictly positive values.
///
/// `G = 2 Σ i x(i) / (n Σ x(i)) - (n + 1) / n` over the ascending order
/// statistics `x(1) <= ... <= x(n)`. Lies in `[0, (n - 1) / n]`.
pub fn gini(values: &[f64]) -> Result<f64, StatsError> {
    validate_positive(values)?;
    Ok(gini_sorted(&sorted_ascending(values)).max(0.0))
}

/// Gini over values where zeros are allowed (people with no mentions).
/// At least one value must be positive.
pub fn gini_nonnegative(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(StatsError::NonPositive { index, value });
    }
    if values.iter().all(|v| *v == 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    Ok(gini_sorted(&sorted_ascending(values)).max(0.0))
}

pub fn gini_counts(counts: &[u64]) -> Result<f64, StatsError> {
    gini(&as_f64(counts))
}

fn as_f64(counts: &[u64]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewnessEstimator {
    /// `g1 = m3 / m2^(3/2)` with divisor-n central moments.
    #[default]
    Population,
    /// `G1 = g1 * sqrt(n (n - 1)) / (n - 2)`.
    Adjusted,
}

pub fn skewness(values: &[f64], estimator: SkewnessEstimator) -> Result<f64, StatsError> {
    let n = values.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(m2, m3), x| {
        let d = x - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let (m2, m3) = (m2 / nf, m3 / nf);
    if m2 <= f64::EPSILON * mean * mean || m2 == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let g1 = m3 / m2.powf(1.5);
    Ok(match estimator {
        SkewnessEstimator::Population => g1,
        SkewnessEstimator::Adjusted => g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0),
    })
}

/// OLS slope of ln(count) against ln(rank), ranking counts in descending order.
pub fn zipf_slope(counts: &[f64]) -> Result<f64, StatsError> {
    if counts.len() < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            got: counts.len(),
        });
    }
    validate_positive(counts)?;
    let mut desc = counts.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    let xs: Vec<f64> = (1..=desc.len()).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = desc.iter().map(|c| c.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = xs.iter().zip(&ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    Ok(sxy / sxx)
}

/// Number of largest observations dropped for a top-`fraction` trim: ⌈fraction·n⌉.
pub fn trim_count(n: usize, fraction: f64) -> Result<usize, StatsError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(StatsError::InvalidFraction(fraction));
    }
    // the epsilon absorbs binary representation error in fractions like 0.005
    let k = (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
    Ok(k.min(n))
}

fn trimmed_ascending(counts: &[u64], fraction: f64) -> Result<Vec<u64>, StatsError> {
    if counts.is_empty() {
        return Err(StatsError::Empty);
    }
    let k = trim_count(counts.len(), fraction)?;
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    sorted.truncate(counts.len() - k);
    if sorted.is_empty() {
        return Err(StatsError::EmptyAfterTrim {
            trimmed: k,
            n: counts.len(),
        });
    }
    Ok(sorted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub x: u64,
    pub p: f64,
}

/// Proportion of values `>= x` for every distinct surviving `x`, after
/// dropping the ⌈fraction·n⌉ largest values.
pub fn reverse_cdf(counts: &[u64], trim_top_fraction: f64) -> Result<Vec<CdfPoint>, StatsError> {
    let sorted = trimmed_ascending(counts, trim_top_fraction)?;
    let m = sorted.len();
    let mut points = Vec::new();
    let mut i = 0;
    while i < m {
        let x = sorted[i];
        points.push(CdfPoint {
            x,
            p: (m - i) as f64 / m as f64,
        });
        while i < m && sorted[i] == x {
            i += 1;
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub count: u64,
    pub frequency: u64,
}

/// Frequency of each distinct count after excluding the ⌈fraction·n⌉ largest.
pub fn histogram_series(counts: &[u64], exclude_top_fraction: f64) -> Result<Vec<HistogramBin>, StatsError> {
    let sorted = trimmed_ascending(counts, exclude_top_fraction)?;
    let mut bins: Vec<HistogramBin> = Vec::new();
    for c in sorted {
        match bins.last_mut() {
            Some(bin) if bin.count == c => bin.frequency += 1,
            _ => bins.push(HistogramBin { count: c, frequency: 1 }),
        }
    }
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPoint {
    pub rank: usize,
    pub person: PersonKey,
    pub count: u64,
}

/// Rank/frequency points with the top ⌈fraction·n⌉ ranks left out. Surviving
/// points keep their original rank.
pub fn rank_frequency_series(ledger: &MentionLedger, exclude_top_fraction: f64) -> Result<Vec<RankPoint>, StatsError> {
    let ranked = ledger.ranked();
    if ranked.is_empty() {
        return Err(StatsError::Empty);
    }
    let k = trim_count(ranked.len(), exclude_top_fraction)?;
    if k == ranked.len() {
        return Err(StatsError::EmptyAfterTrim {
            trimmed: k,
            n: ranked.len(),
        });
    }
    Ok(ranked
        .into_iter()
        .enumerate()
        .skip(k)
        .map(|(i, (person, count))| RankPoint {
            rank: i + 1,
            person: person.clone(),
            count,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p50: u64,
    pub p90: u64,
    pub p99: u64,
}

/// Nearest-rank percentile: the smallest observed count with at least p% of
/// observations at or below it.
fn nearest_rank(sorted: &[u64], p: f64) -> u64 {
    let rank = ((p / 100.0) * sorted.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub total: u64,
    pub gini: f64,
    /// `None` when fewer than three persons or all counts are equal.
    pub skewness: Option<f64>,
    /// `None` with fewer than two persons.
    pub zipf_slope: Option<f64>,
    pub percentiles: Percentiles,
    pub distinct: usize,
}

/// Summary of a list of per-person counts. Never trims.
pub fn summarize_counts(counts: &[u64], estimator: SkewnessEstimator) -> Result<DistributionSummary, StatsError> {
    if counts.is_empty() {
        return Err(StatsError::Empty);
    }
    let values = as_f64(counts);
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let skew = match skewness(&values, estimator) {
        Ok(s) => Some(s),
        Err(StatsError::TooFew { .. } | StatsError::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    let slope = match zipf_slope(&values) {
        Ok(s) => Some(s),
        Err(StatsError::TooFew { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DistributionSummary {
        n: counts.len(),
        total: counts.iter().sum(),
        gini: gini(&values)?,
        skewness: skew,
        zipf_slope: slope,
        percentiles: Percentiles {
            p50: nearest_rank(&sorted, 50.0),
            p90: nearest_rank(&sorted, 90.0),
            p99: nearest_rank(&sorted, 99.0),
        },
        distinct: counts.iter().filter(|&&c| c >= 1).count(),
    })
}

pub fn summarize(ledger: &MentionLedger, estimator: SkewnessEstimator) -> Result<DistributionSummary, StatsError> {
    summarize_counts(&ledger.counts(), estimator)
}
