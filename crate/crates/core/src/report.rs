//! Report serialisation: `summary.json`, per-outlet CSV tables, a hashed
//! manifest, and Vega-Lite plot specifications.
//!
//! Every byte written here is derived from ordered collections, so identical
//! inputs give identical files. Before anything touches disk, all string cells
//! are checked against the set of real byline names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bias::{AuthorBiasProfile, CoMentionEdge, TopEntry};
use crate::stats::{CdfPoint, DistributionSummary, HistogramBin, RankPoint};
use crate::text::{BoxplotStats, TermFrequency};

const VEGA_LITE_SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialisation failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv serialisation failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("anonymisation audit failed: {file} contains a real byline name at {location}")]
    Deanonymised { file: String, location: String },
    #[error("outlet id {0:?} cannot be used as a directory name")]
    BadOutletId(String),
    #[error("unknown plot kind {0:?}")]
    UnknownKind(String),
    #[error("plot kind {kind} does not match the supplied {series} series")]
    KindMismatch { kind: PlotKind, series: PlotKind },
    #[error("plot series is empty")]
    EmptySeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeriesSet {
    pub reverse_cdf: Vec<CdfPoint>,
    pub rank_frequency: Vec<RankPoint>,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutletReport {
    pub outlet: String,
    pub articles: usize,
    pub summary: DistributionSummary,
    pub top_mentions: Vec<TopEntry>,
    pub repetition: Vec<AuthorBiasProfile>,
    pub terms: Vec<TermFrequency>,
    pub sentiment: BoxplotStats,
    pub series: PlotSeriesSet,
    /// Written to `co_mentions.csv` only.
    #[serde(skip)]
    pub co_mentions: Vec<CoMentionEdge>,
    /// Per-title compound scores, used for the sentiment box plot.
    #[serde(skip)]
    pub title_compounds: Vec<f64>,
}

/// Run-level data that accompanies the per-outlet reports.
#[derive(Debug, Clone, Default)]
pub struct SummaryContext {
    pub config_fingerprint: String,
    /// `None` in deterministic mode.
    pub generated_at: Option<String>,
    pub pooled: Option<DistributionSummary>,
    /// Real byline names (raw and canonical) that must not appear in any output.
    pub forbidden: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub config_fingerprint: String,
    pub outlets: BTreeMap<String, OutletReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pooled: Option<DistributionSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Checks every string (and object key) in a JSON value.
pub fn audit_json(value: &Value, forbidden: &BTreeSet<String>, file: &str) -> Result<(), ReportError> {
    fn walk(v: &Value, path: &mut String, forbidden: &BTreeSet<String>, file: &str) -> Result<(), ReportError> {
        let leak = |path: &str| ReportError::Deanonymised {
            file: file.to_string(),
            location: if path.is_empty() { "/".into() } else { path.to_string() },
        };
        match v {
            Value::String(s) if forbidden.contains(s) => Err(leak(path)),
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    let len = path.len();
                    path.push_str(&format!("/{i}"));
                    walk(item, path, forbidden, file)?;
                    path.truncate(len);
                }
                Ok(())
            }
            Value::Object(map) => {
                for (k, item) in map {
                    let len = path.len();
                    path.push_str(&format!("/{k}"));
                    if forbidden.contains(k) {
                        return Err(leak(&path[..len]));
                    }
                    walk(item, path, forbidden, file)?;
                    path.truncate(len);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
    walk(value, &mut String::new(), forbidden, file)
}

/// Checks every cell of a CSV document.
pub fn audit_csv(bytes: &[u8], forbidden: &BTreeSet<String>, file: &str) -> Result<(), ReportError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if let Some(col) = record.iter().position(|cell| forbidden.contains(cell)) {
            return Err(ReportError::Deanonymised {
                file: file.to_string(),
                location: format!("row {} column {}", row + 1, col + 1),
            });
        }
    }
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, ReportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush().map_err(|source| ReportError::Io {
        path: PathBuf::new(),
        source,
    })?;
    writer
        .into_inner()
        .map_err(|e| ReportError::Csv(csv::Error::from(e.into_error())))
}

pub fn top_mentions_csv(entries: &[TopEntry]) -> Result<Vec<u8>, ReportError> {
    csv_bytes(
        &["rank", "person", "count", "share_pct", "share_pct_rounded"],
        entries.iter().map(|e| {
            [
                e.rank.to_string(),
                e.person.to_string(),
                e.count.to_string(),
                e.share_pct.to_string(),
                e.share_display(),
            ]
        }),
    )
}

pub fn repetition_csv(profiles: &[AuthorBiasProfile]) -> Result<Vec<u8>, ReportError> {
    csv_bytes(
        &[
            "author",
            "hhi",
            "person",
            "article_count",
            "cumulative_mentions",
            "flagged",
        ],
        profiles.iter().flat_map(|p| {
            p.records.iter().map(move |r| {
                [
                    p.author.clone(),
                    p.hhi.to_string(),
                    r.person.to_string(),
                    r.article_count.to_string(),
                    r.cumulative_mentions.to_string(),
                    r.flagged.to_string(),
                ]
            })
        }),
    )
}

pub fn terms_csv(terms: &[TermFrequency]) -> Result<Vec<u8>, ReportError> {
    csv_bytes(
        &["rank", "term", "count"],
        terms
            .iter()
            .enumerate()
            .map(|(i, t)| [(i + 1).to_string(), t.term.clone(), t.count.to_string()]),
    )
}

pub fn co_mentions_csv(edges: &[CoMentionEdge]) -> Result<Vec<u8>, ReportError> {
    csv_bytes(
        &["person_a", "person_b", "weight"],
        edges
            .iter()
            .map(|e| [e.person_a.to_string(), e.person_b.to_string(), e.weight.to_string()]),
    )
}

fn check_outlet_id(outlet: &str) -> Result<(), ReportError> {
    let ok = !outlet.is_empty()
        && outlet != "."
        && outlet != ".."
        && outlet != "plots"
        && !outlet.contains(['/', '\\', '\0']);
    if ok {
        Ok(())
    } else {
        Err(ReportError::BadOutletId(outlet.to_string()))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>, ReportError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `summary.json`, four CSV tables per outlet and `manifest.json`.
///
/// All documents are rendered and audited in memory first; nothing is written
/// if any of them contains a forbidden name.
pub fn emit_summary(reports: &[OutletReport], ctx: &SummaryContext, out_dir: &Path) -> Result<Manifest, ReportError> {
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();

    let doc = SummaryDocument {
        generated_at: ctx.generated_at.clone(),
        config_fingerprint: ctx.config_fingerprint.clone(),
        outlets: reports.iter().map(|r| (r.outlet.clone(), r.clone())).collect(),
        pooled: ctx.pooled.clone(),
    };
    let summary_value = serde_json::to_value(&doc)?;
    audit_json(&summary_value, &ctx.forbidden, "summary.json")?;
    files.insert("summary.json".into(), pretty_json(&summary_value)?);

    for report in reports {
        check_outlet_id(&report.outlet)?;
        let tables = [
            ("top_mentions.csv", top_mentions_csv(&report.top_mentions)?),
            ("repetition.csv", repetition_csv(&report.repetition)?),
            ("terms.csv", terms_csv(&report.terms)?),
            ("co_mentions.csv", co_mentions_csv(&report.co_mentions)?),
        ];
        for (name, bytes) in tables {
            let rel = format!("{}/{name}", report.outlet);
            audit_csv(&bytes, &ctx.forbidden, &rel)?;
            files.insert(rel, bytes);
        }
    }

    let mut manifest = Manifest::default();
    for (rel, bytes) in &files {
        write_file(&out_dir.join(rel), bytes)?;
        manifest.files.push(ManifestEntry {
            path: rel.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }
    write_file(&out_dir.join("manifest.json"), &pretty_json(&manifest)?)?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    ReverseCdf,
    RankFrequency,
    Histogram,
    TermBars,
    SentimentBox,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::ReverseCdf,
        PlotKind::RankFrequency,
        PlotKind::Histogram,
        PlotKind::TermBars,
        PlotKind::SentimentBox,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::ReverseCdf => "reverse_cdf",
            PlotKind::RankFrequency => "rank_frequency",
            PlotKind::Histogram => "histogram",
            PlotKind::TermBars => "term_bars",
            PlotKind::SentimentBox => "sentiment_box",
        }
    }

    pub fn is_log_log(self) -> bool {
        matches!(
            self,
            PlotKind::ReverseCdf | PlotKind::RankFrequency | PlotKind::Histogram
        )
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlotKind {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ReportError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotSeries {
    ReverseCdf(Vec<CdfPoint>),
    RankFrequency(Vec<RankPoint>),
    Histogram(Vec<HistogramBin>),
    TermBars(Vec<TermFrequency>),
    /// (outlet, compound score) per title.
    SentimentBox(Vec<(String, f64)>),
}

impl PlotSeries {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotSeries::ReverseCdf(_) => PlotKind::ReverseCdf,
            PlotSeries::RankFrequency(_) => PlotKind::RankFrequency,
            PlotSeries::Histogram(_) => PlotKind::Histogram,
            PlotSeries::TermBars(_) => PlotKind::TermBars,
            PlotSeries::SentimentBox(_) => PlotKind::SentimentBox,
        }
    }

    fn len(&self) -> usize {
        match self {
            PlotSeries::ReverseCdf(v) => v.len(),
            PlotSeries::RankFrequency(v) => v.len(),
            PlotSeries::Histogram(v) => v.len(),
            PlotSeries::TermBars(v) => v.len(),
            PlotSeries::SentimentBox(v) => v.len(),
        }
    }
}

fn axis(field: &str, title: &str, log: bool) -> Value {
    let mut a = json!({ "field": field, "type": "quantitative", "title": title });
    a["scale"] = if log {
        json!({ "type": "log" })
    } else {
        json!({ "type": "linear" })
    };
    a
}

/// Builds a self-contained Vega-Lite document with the data inlined.
pub fn render_plot_spec(series: &PlotSeries, kind: PlotKind, title: &str) -> Result<Value, ReportError> {
    if series.kind() != kind {
        return Err(ReportError::KindMismatch {
            kind,
            series: series.kind(),
        });
    }
    if series.len() == 0 {
        return Err(ReportError::EmptySeries);
    }
    let (values, mark, encoding) = match series {
        PlotSeries::ReverseCdf(points) => (
            serde_json::to_value(points)?,
            json!({ "type": "line", "point": true, "interpolate": "step-after" }),
            json!({
                "x": axis("x", "mentions x", true),
                "y": axis("p", "share of persons mentioned at least x times", true),
            }),
        ),
        PlotSeries::RankFrequency(points) => (
            serde_json::to_value(points)?,
            json!({ "type": "point" }),
            json!({
                "x": axis("rank", "rank", true),
                "y": axis("count", "mentions", true),
                "tooltip": [{ "field": "person", "type": "nominal" }, { "field": "count", "type": "quantitative" }],
            }),
        ),
        PlotSeries::Histogram(bins) => (
            serde_json::to_value(bins)?,
            json!({ "type": "point" }),
            json!({
                "x": axis("count", "mentions per person", true),
                "y": axis("frequency", "number of persons", true),
            }),
        ),
        PlotSeries::TermBars(terms) => (
            serde_json::to_value(terms)?,
            json!({ "type": "bar" }),
            json!({
                "x": { "field": "term", "type": "nominal", "sort": "-y", "title": "term" },
                "y": axis("count", "occurrences in titles", false),
            }),
        ),
        PlotSeries::SentimentBox(rows) => (
            Value::Array(
                rows.iter()
                    .map(|(outlet, compound)| json!({ "outlet": outlet, "compound": compound }))
                    .collect(),
            ),
            json!({ "type": "boxplot", "extent": "min-max" }),
            json!({
                "x": { "field": "outlet", "type": "nominal", "title": "outlet" },
                "y": {
                    "field": "compound",
                    "type": "quantitative",
                    "title": "compound sentiment",
                    "scale": { "type": "linear", "domain": [-1.0, 1.0] },
                },
            }),
        ),
    };
    Ok(json!({
        "$schema": VEGA_LITE_SCHEMA,
        "title": title,
        "usermeta": { "kind": kind.as_str() },
        "data": { "values": values },
        "mark": mark,
        "encoding": encoding,
    }))
}

/// Renders and writes a plot spec to `out`.
pub fn emit_plot_spec(series: &PlotSeries, kind: PlotKind, out: &Path) -> Result<PathBuf, ReportError> {
    let title = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(kind.as_str())
        .to_string();
    let spec = render_plot_spec(series, kind, &title)?;
    write_file(out, &pretty_json(&spec)?)?;
    Ok(out.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::clean_name;
    use crate::stats::Percentiles;

    fn summary() -> DistributionSummary {
        DistributionSummary {
            n: 2,
            total: 10,
            gini: 0.4,
            skewness: None,
            zipf_slope: Some(-3.169925001442312),
            percentiles: Percentiles { p50: 1, p90: 9, p99: 9 },
            distinct: 2,
        }
    }

    fn report(outlet: &str, person: &str) -> OutletReport {
        let person = clean_name(person).unwrap();
        OutletReport {
            outlet: outlet.into(),
            articles: 3,
            summary: summary(),
            top_mentions: vec![TopEntry {
                rank: 1,
                person: person.clone(),
                count: 9,
                share_pct: 90.0,
            }],
            repetition: vec![],
            terms: vec![TermFrequency {
                term: "quantum".into(),
                count: 2,
            }],
            sentiment: BoxplotStats {
                min: -0.5,
                q1: 0.0,
                median: 0.1,
                q3: 0.2,
                max: 0.7,
                mean: 0.1,
            },
            series: PlotSeriesSet {
                reverse_cdf: vec![CdfPoint { x: 1, p: 1.0 }, CdfPoint { x: 9, p: 0.5 }],
                rank_frequency: vec![],
                histogram: vec![],
            },
            co_mentions: vec![],
            title_compounds: vec![0.1],
        }
    }

    #[test]
    fn two_outlets_nine_files_and_stable_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let reports = [report("q", "Jane Doe"), report("w", "Jon Roe")];
        let ctx = SummaryContext {
            config_fingerprint: "abc".into(),
            ..Default::default()
        };
        let m1 = emit_summary(&reports, &ctx, dir.path()).unwrap();
        assert_eq!(m1.len(), 9);
        let m2 = emit_summary(&reports, &ctx, dir.path()).unwrap();
        assert_eq!(m1, m2);
        let manifest: Manifest = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest, m1);
        for entry in &manifest.files {
            let bytes = fs::read(dir.path().join(&entry.path)).unwrap();
            assert_eq!(sha256_hex(&bytes), entry.sha256);
        }
    }

    #[test]
    fn summary_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let reports = [report("q", "Jane Doe")];
        let ctx = SummaryContext {
            config_fingerprint: "abc".into(),
            generated_at: Some("2026-01-01T00:00:00Z".into()),
            pooled: Some(summary()),
            ..Default::default()
        };
        emit_summary(&reports, &ctx, dir.path()).unwrap();
        let doc: SummaryDocument = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
        let mut expected = reports[0].clone();
        expected.co_mentions.clear();
        expected.title_compounds.clear();
        assert_eq!(doc.outlets["q"], expected);
        assert_eq!(doc.pooled, Some(summary()));
        assert_eq!(doc.generated_at.as_deref(), Some("2026-01-01T00:00:00Z"));
    }

    #[test]
    fn generated_at_omitted_when_absent() {
        let dir = tempfile::tempdir().unwrap();
        emit_summary(&[report("q", "Jane Doe")], &SummaryContext::default(), dir.path()).unwrap();
        let v: Value = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
        assert!(v.get("generated_at").is_none());
        assert!(v.get("config_fingerprint").is_some());
    }

    #[test]
    fn real_name_in_report_is_rejected_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = SummaryContext {
            forbidden: ["Jane Doe".to_string()].into(),
            ..Default::default()
        };
        let err = emit_summary(&[report("q", "Jane Doe")], &ctx, dir.path()).unwrap_err();
        assert!(matches!(err, ReportError::Deanonymised { .. }));
        assert!(!err.to_string().contains("Jane"));
        assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
    }

    #[test]
    fn csv_audit_finds_cells() {
        let forbidden: BTreeSet<String> = ["Jane Doe".to_string()].into();
        assert!(audit_csv(b"a,b\nx,\"Jane Doe\"\n", &forbidden, "t.csv").is_err());
        assert!(audit_csv(b"a,b\nx,Jane Does\n", &forbidden, "t.csv").is_ok());
    }

    #[test]
    fn csv_quoting_is_minimal() {
        let edges = [CoMentionEdge {
            person_a: clean_name("Doe, Jane").unwrap(),
            person_b: clean_name("Jon Roe").unwrap(),
            weight: 2,
        }];
        let text = String::from_utf8(co_mentions_csv(&edges).unwrap()).unwrap();
        assert_eq!(text, "person_a,person_b,weight\n\"Doe, Jane\",Jon Roe,2\n");
    }

    #[test]
    fn rejects_path_like_outlets() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_summary(&[report("../x", "Jane Doe")], &SummaryContext::default(), dir.path());
        assert!(matches!(err, Err(ReportError::BadOutletId(_))));
    }

    #[test]
    fn plot_kinds_parse() {
        for k in PlotKind::ALL {
            assert_eq!(k.as_str().parse::<PlotKind>().unwrap(), k);
        }
        assert!(matches!("pie".parse::<PlotKind>(), Err(ReportError::UnknownKind(_))));
    }

    #[test]
    fn reverse_cdf_spec_is_log_log() {
        let dir = tempfile::tempdir().unwrap();
        let series = PlotSeries::ReverseCdf(vec![CdfPoint { x: 1, p: 1.0 }, CdfPoint { x: 4, p: 0.25 }]);
        let path = emit_plot_spec(&series, PlotKind::ReverseCdf, &dir.path().join("rcdf.json")).unwrap();
        let spec: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
        assert_eq!(spec["encoding"]["x"]["scale"]["type"], "log");
        assert_eq!(spec["encoding"]["y"]["scale"]["type"], "log");
        assert_eq!(spec["data"]["values"].as_array().unwrap().len(), 2);
        let back: Vec<CdfPoint> = serde_json::from_value(spec["data"]["values"].clone()).unwrap();
        assert_eq!(PlotSeries::ReverseCdf(back), series);
    }

    #[test]
    fn term_bars_has_one_mark_per_term() {
        let terms: Vec<TermFrequency> = (0..20)
            .map(|i| TermFrequency {
                term: format!("term{i}"),
                count: 40 - i,
            })
            .collect();
        let spec = render_plot_spec(&PlotSeries::TermBars(terms), PlotKind::TermBars, "t").unwrap();
        assert_eq!(spec["mark"]["type"], "bar");
        assert_eq!(spec["data"]["values"].as_array().unwrap().len(), 20);
        assert_eq!(spec["encoding"]["y"]["scale"]["type"], "linear");
    }

    #[test]
    fn empty_or_mismatched_series_rejected() {
        assert!(matches!(
            render_plot_spec(&PlotSeries::Histogram(vec![]), PlotKind::Histogram, "h"),
            Err(ReportError::EmptySeries)
        ));
        assert!(matches!(
            render_plot_spec(
                &PlotSeries::Histogram(vec![HistogramBin { count: 1, frequency: 1 }]),
                PlotKind::TermBars,
                "h"
            ),
            Err(ReportError::KindMismatch { .. })
        ));
    }
}
