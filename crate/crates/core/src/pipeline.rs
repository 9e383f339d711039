//! End-to-end audit: load, filter, anonymise, analyse each outlet, write reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::anonymize::{build_author_map, build_author_map_for, AnonymizationMap, AnonymizeError};
use crate::bias::{co_mention_edges, repetition_index, top_mentioned, BiasError, FlagRule};
use crate::corpus::{load_corpus, partition_by_outlet, Article, Corpus, CorpusError, LoadMode, SkippedLine};
use crate::names::{Blacklist, BlacklistError};
use crate::report::{
    audit_json, emit_summary, render_plot_spec, sha256_hex, Manifest, ManifestEntry, OutletReport, PlotKind,
    PlotSeries, PlotSeriesSet, ReportError, SummaryContext,
};
use crate::stats::{
    aggregate, histogram_series, rank_frequency_series, reverse_cdf, summarize, summarize_counts, DistributionSummary,
    MentionLedger, SkewnessEstimator, StatsError,
};
use crate::text::{
    boxplot_stats, load_stopwords, term_frequencies, LexiconError, SentimentAnalyzer, TextError, Tokenizer,
};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("blacklist: {0}")]
    Blacklist(#[from] BlacklistError),
    #[error("text: {0}")]
    Text(#[from] TextError),
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error("anonymize: {0}")]
    Anonymize(#[from] AnonymizeError),
    #[error("stats: outlet '{outlet}': {source}")]
    Stats {
        outlet: String,
        #[source]
        source: StatsError,
    },
    #[error("bias: outlet '{outlet}': {source}")]
    Bias {
        outlet: String,
        #[source]
        source: BiasError,
    },
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl AuditError {
    /// Missing or malformed inputs and bad settings, as opposed to failures
    /// during analysis or output.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            AuditError::Corpus(_)
                | AuditError::Blacklist(_)
                | AuditError::Text(TextError::Stopwords { .. })
                | AuditError::Lexicon(_)
                | AuditError::Config(_)
                | AuditError::Unreadable { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub blacklist: PathBuf,
    pub stopwords: PathBuf,
    pub lexicon: PathBuf,
    pub out: PathBuf,
    /// Top fraction of persons left out of the histogram and rank-frequency series.
    pub trim_hist: f64,
    /// Top fraction of persons left out of the reverse CDF.
    pub trim_rcdf: f64,
    pub top_k: usize,
    pub terms_k: usize,
    pub flag: FlagRule,
    pub skewness: SkewnessEstimator,
    pub outlet: Option<String>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub deterministic: bool,
    pub per_outlet_anon: bool,
    pub lenient: bool,
    pub threads: Option<usize>,
    pub min_token_len: usize,
    pub whitelist: BTreeSet<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::from("data/fixtures/synthetic_corpus.jsonl"),
            blacklist: PathBuf::from("data/blacklist.json"),
            stopwords: PathBuf::from("data/stopwords_en.txt"),
            lexicon: PathBuf::from("data/vader_lexicon.tsv"),
            out: PathBuf::from("out"),
            trim_hist: 0.01,
            trim_rcdf: 0.005,
            top_k: 10,
            terms_k: 20,
            flag: FlagRule::default(),
            skewness: SkewnessEstimator::Population,
            outlet: None,
            from: None,
            to: None,
            deterministic: false,
            per_outlet_anon: false,
            lenient: false,
            threads: None,
            min_token_len: 3,
            whitelist: BTreeSet::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), AuditError> {
        for (name, f) in [("trim-hist", self.trim_hist), ("trim-rcdf", self.trim_rcdf)] {
            if !(0.0..1.0).contains(&f) {
                return Err(AuditError::Config(format!("{name} must be in [0, 1), got {f}")));
            }
        }
        if self.top_k == 0 || self.terms_k == 0 {
            return Err(AuditError::Config("top-k and terms-k must be at least 1".into()));
        }
        if self.min_token_len == 0 {
            return Err(AuditError::Config("minimum token length must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(AuditError::Config("threads must be at least 1".into()));
        }
        if let (Some(from), Some(to)) = (self.from, self.to) {
            if from > to {
                return Err(AuditError::Config(format!("--from {from} is after --to {to}")));
            }
        }
        Ok(())
    }

    fn load_mode(&self) -> LoadMode {
        if self.lenient {
            LoadMode::Lenient
        } else {
            LoadMode::Strict
        }
    }
}

/// Reference data shared by all outlets.
pub struct Resources {
    pub blacklist: Blacklist,
    pub tokenizer: Tokenizer,
    pub analyzer: SentimentAnalyzer,
    /// SHA-256 over the blacklist, stopword and lexicon files.
    pub fingerprint: String,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, AuditError> {
    fs::read(path).map_err(|source| AuditError::Unreadable {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_resources(cfg: &RunConfig) -> Result<Resources, AuditError> {
    let blacklist = Blacklist::load(&cfg.blacklist)?;
    let stopwords = load_stopwords(&cfg.stopwords)?;
    let tokenizer = Tokenizer::new(stopwords, cfg.min_token_len, cfg.whitelist.clone())?;
    let analyzer = SentimentAnalyzer::from_file(&cfg.lexicon)?;
    let mut hasher = Sha256::new();
    for path in [&cfg.blacklist, &cfg.stopwords, &cfg.lexicon] {
        let bytes = read_bytes(path)?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(Resources {
        blacklist,
        tokenizer,
        analyzer,
        fingerprint: hex::encode(hasher.finalize()),
    })
}

/// One alias map for the whole corpus, or one per outlet.
#[derive(Debug, Clone)]
pub enum AuthorMaps {
    Global(AnonymizationMap),
    PerOutlet(BTreeMap<String, AnonymizationMap>),
}

impl AuthorMaps {
    pub fn build(corpus: &Corpus, per_outlet: bool) -> Result<Self, AnonymizeError> {
        if per_outlet {
            partition_by_outlet(corpus)
                .into_iter()
                .map(|(outlet, articles)| Ok((outlet, build_author_map_for(&articles)?)))
                .collect::<Result<_, _>>()
                .map(AuthorMaps::PerOutlet)
        } else {
            build_author_map(corpus).map(AuthorMaps::Global)
        }
    }

    pub fn for_outlet(&self, outlet: &str) -> Option<&AnonymizationMap> {
        match self {
            AuthorMaps::Global(map) => Some(map),
            AuthorMaps::PerOutlet(maps) => maps.get(outlet),
        }
    }

    pub fn maps(&self) -> Vec<(Option<&str>, &AnonymizationMap)> {
        match self {
            AuthorMaps::Global(map) => vec![(None, map)],
            AuthorMaps::PerOutlet(maps) => maps.iter().map(|(o, m)| (Some(o.as_str()), m)).collect(),
        }
    }
}

/// Canonical and raw byline names; none of these may appear in any output.
pub fn forbidden_names(corpus: &Corpus, maps: &AuthorMaps) -> BTreeSet<String> {
    let mut names: BTreeSet<String> = corpus
        .articles()
        .iter()
        .flat_map(|a| a.authors.iter().cloned())
        .collect();
    for (_, map) in maps.maps() {
        names.extend(map.real_names().map(str::to_string));
    }
    names
}

/// A loaded, filtered corpus with its alias maps.
pub struct Prepared {
    pub corpus: Corpus,
    pub skipped: Vec<SkippedLine>,
    pub maps: AuthorMaps,
    pub forbidden: BTreeSet<String>,
}

/// Loads the corpus, builds alias maps over all of it, then applies the
/// outlet and date filters. Aliases therefore do not depend on the filters.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, AuditError> {
    cfg.validate()?;
    let loaded = load_corpus(&cfg.corpus, cfg.load_mode())?;
    let maps = AuthorMaps::build(&loaded.corpus, cfg.per_outlet_anon)?;
    let forbidden = forbidden_names(&loaded.corpus, &maps);
    if let Some(outlet) = &cfg.outlet {
        if !loaded.corpus.outlets().contains(outlet) {
            return Err(AuditError::Config(format!(
                "outlet '{outlet}' does not occur in the corpus"
            )));
        }
    }
    let corpus = loaded.corpus.filtered(|a| {
        cfg.outlet.as_ref().is_none_or(|o| &a.outlet == o)
            && cfg.from.is_none_or(|d| a.date >= d)
            && cfg.to.is_none_or(|d| a.date <= d)
    });
    if corpus.is_empty() {
        return Err(AuditError::Config(
            "no articles left after the outlet and date filters".into(),
        ));
    }
    Ok(Prepared {
        corpus,
        skipped: loaded.skipped,
        maps,
        forbidden,
    })
}

/// Trimming can leave nothing on very small outlets; the series is then empty.
fn tolerate_empty<T>(res: Result<Vec<T>, StatsError>) -> Result<Vec<T>, StatsError> {
    match res {
        Err(StatsError::EmptyAfterTrim { .. }) => Ok(Vec::new()),
        other => other,
    }
}

pub fn outlet_ledger(
    outlet: &str,
    articles: &[Article],
    res: &Resources,
    map: &AnonymizationMap,
) -> Result<MentionLedger, AuditError> {
    aggregate(articles, &res.blacklist, map).map_err(|source| AuditError::Stats {
        outlet: outlet.to_string(),
        source,
    })
}

pub fn outlet_report(
    outlet: &str,
    articles: &[Article],
    res: &Resources,
    map: &AnonymizationMap,
    cfg: &RunConfig,
) -> Result<(OutletReport, MentionLedger), AuditError> {
    let stats_err = |source| AuditError::Stats {
        outlet: outlet.to_string(),
        source,
    };
    let bias_err = |source| AuditError::Bias {
        outlet: outlet.to_string(),
        source,
    };
    let ledger = outlet_ledger(outlet, articles, res, map)?;
    let summary = summarize(&ledger, cfg.skewness).map_err(stats_err)?;
    let counts = ledger.counts();
    let series = PlotSeriesSet {
        reverse_cdf: tolerate_empty(reverse_cdf(&counts, cfg.trim_rcdf)).map_err(stats_err)?,
        rank_frequency: tolerate_empty(rank_frequency_series(&ledger, cfg.trim_hist)).map_err(stats_err)?,
        histogram: tolerate_empty(histogram_series(&counts, cfg.trim_hist)).map_err(stats_err)?,
    };
    let top_mentions = top_mentioned(&ledger, cfg.top_k).map_err(bias_err)?;
    let repetition = repetition_index(&ledger, cfg.flag);
    let co_mentions = co_mention_edges(articles, &res.blacklist, map);

    let titles: Vec<&str> = articles.iter().map(|a| a.title.as_str()).collect();
    let terms = term_frequencies(&res.tokenizer, &titles, cfg.terms_k);
    let title_compounds: Vec<f64> = titles.iter().map(|t| res.analyzer.score(t).compound).collect();
    let sentiment = boxplot_stats(&title_compounds)?;

    let report = OutletReport {
        outlet: outlet.to_string(),
        articles: articles.len(),
        summary,
        top_mentions,
        repetition,
        terms,
        sentiment,
        series,
        co_mentions,
        title_compounds,
    };
    Ok((report, ledger))
}

/// Reports for every outlet plus the pooled distribution.
pub struct Analysis {
    pub reports: Vec<OutletReport>,
    pub pooled: DistributionSummary,
    pub fingerprint: String,
    pub forbidden: BTreeSet<String>,
    pub skipped: Vec<SkippedLine>,
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, AuditError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis, AuditError> {
    let res = load_resources(cfg)?;
    let prepared = prepare(cfg)?;
    let outlets = partition_by_outlet(&prepared.corpus);
    let results = with_pool(cfg.threads, || {
        outlets
            .par_iter()
            .map(|(outlet, articles)| {
                let map = prepared
                    .maps
                    .for_outlet(outlet)
                    .ok_or_else(|| AuditError::Config(format!("no alias map for outlet '{outlet}'")))?;
                outlet_report(outlet, articles, &res, map, cfg)
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut pooled_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for (_, ledger) in &results {
        for (person, count) in &ledger.person_totals {
            *pooled_counts.entry(person.as_str()).or_insert(0) += count;
        }
    }
    let pooled_counts: Vec<u64> = pooled_counts.into_values().collect();
    let pooled = summarize_counts(&pooled_counts, cfg.skewness).map_err(|source| AuditError::Stats {
        outlet: "(pooled)".into(),
        source,
    })?;

    Ok(Analysis {
        reports: results.into_iter().map(|(r, _)| r).collect(),
        pooled,
        fingerprint: res.fingerprint,
        forbidden: prepared.forbidden,
        skipped: prepared.skipped,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<OutletReport>,
    pub pooled: DistributionSummary,
    /// Entries of `manifest.json`.
    pub manifest: Manifest,
    /// Plot specs written under `plots/`.
    pub plots: Vec<ManifestEntry>,
    pub skipped: Vec<SkippedLine>,
}

fn plot_jobs(reports: &[OutletReport]) -> Vec<(String, PlotSeries)> {
    let mut jobs = Vec::new();
    for r in reports {
        let dir = format!("plots/{}", r.outlet);
        jobs.push((
            format!("{dir}/reverse_cdf.json"),
            PlotSeries::ReverseCdf(r.series.reverse_cdf.clone()),
        ));
        jobs.push((
            format!("{dir}/rank_frequency.json"),
            PlotSeries::RankFrequency(r.series.rank_frequency.clone()),
        ));
        jobs.push((
            format!("{dir}/histogram.json"),
            PlotSeries::Histogram(r.series.histogram.clone()),
        ));
        jobs.push((format!("{dir}/term_bars.json"), PlotSeries::TermBars(r.terms.clone())));
    }
    let boxes = reports
        .iter()
        .flat_map(|r| r.title_compounds.iter().map(|c| (r.outlet.clone(), *c)))
        .collect();
    jobs.push(("plots/sentiment_box.json".into(), PlotSeries::SentimentBox(boxes)));
    jobs
}

fn emit_plots(
    reports: &[OutletReport],
    forbidden: &BTreeSet<String>,
    out: &Path,
) -> Result<Vec<ManifestEntry>, AuditError> {
    let mut written = Vec::new();
    for (rel, series) in plot_jobs(reports) {
        let kind = series.kind();
        let title = match rel.split('/').nth(1) {
            Some(outlet) if kind != PlotKind::SentimentBox => format!("{outlet}: {kind}"),
            _ => kind.to_string(),
        };
        let spec = match render_plot_spec(&series, kind, &title) {
            Ok(spec) => spec,
            Err(ReportError::EmptySeries) => continue,
            Err(e) => return Err(e.into()),
        };
        audit_json(&spec, forbidden, &rel)?;
        let mut bytes = serde_json::to_vec_pretty(&spec).map_err(ReportError::from)?;
        bytes.push(b'\n');
        let path = out.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| ReportError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, &bytes).map_err(|source| ReportError::Io { path, source })?;
        written.push(ManifestEntry {
            path: rel,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    Ok(written)
}

/// Runs the full audit and writes reports and plot specs under `cfg.out`.
pub fn run_audit(cfg: &RunConfig) -> Result<RunOutcome, AuditError> {
    let analysis = analyze(cfg)?;
    let ctx = SummaryContext {
        config_fingerprint: analysis.fingerprint.clone(),
        generated_at: (!cfg.deterministic)
            .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        pooled: Some(analysis.pooled.clone()),
        forbidden: analysis.forbidden.clone(),
    };
    let manifest = emit_summary(&analysis.reports, &ctx, &cfg.out)?;
    let plots = emit_plots(&analysis.reports, &analysis.forbidden, &cfg.out)?;
    Ok(RunOutcome {
        reports: analysis.reports,
        pooled: analysis.pooled,
        manifest,
        plots,
        skipped: analysis.skipped,
    })
}

/// Fixed-width table of outlet, total mentions, distinct persons and Gini.
pub fn summary_table(reports: &[OutletReport], pooled: Option<&DistributionSummary>) -> String {
    let width = reports
        .iter()
        .map(|r| r.outlet.chars().count())
        .chain([6])
        .max()
        .unwrap_or(6);
    let mut out = format!(
        "{:<width$}  {:>9}  {:>8}  {:>6}\n",
        "outlet", "mentions", "persons", "gini"
    );
    let mut row = |name: &str, s: &DistributionSummary| {
        out.push_str(&format!(
            "{:<width$}  {:>9}  {:>8}  {:>6.3}\n",
            name, s.total, s.distinct, s.gini
        ));
    };
    for r in reports {
        row(&r.outlet, &r.summary);
    }
    if let Some(p) = pooled {
        row("(all)", p);
    }
    out
}
