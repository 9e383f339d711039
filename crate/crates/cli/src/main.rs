use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biasaudit::fixture::{generate, FixtureSpec};
use biasaudit::pipeline::{analyze, prepare, summary_table, Analysis, AuditError, AuthorMaps, RunConfig};
use biasaudit::report::audit_json;
use biasaudit::stats::SkewnessEstimator;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "biasaudit",
    version,
    about = "Audit how news outlets distribute mentions of people"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write reports and plot specs.
    Audit(RunArgs),
    /// Print mention-distribution statistics per outlet as JSON.
    Stats(RunArgs),
    /// Print top-mentioned persons and author repetition as JSON.
    Bias(RunArgs),
    /// Print the most frequent title terms per outlet as JSON.
    Topics(RunArgs),
    /// Print title sentiment summaries per outlet as JSON.
    Sentiment(RunArgs),
    /// Write the byline-to-alias map. Keep this file private.
    Anonmap {
        #[command(flatten)]
        run: RunArgs,
        /// Directory receiving anon_map.csv (or anon_map_<outlet>.csv).
        #[arg(long)]
        map_dir: PathBuf,
    },
    /// Write the seeded synthetic corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = FixtureSpec::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = FixtureSpec::default().articles_per_outlet)]
        articles_per_outlet: usize,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with any of the options below; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    blacklist: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trim_hist: Option<f64>,
    #[arg(long)]
    trim_rcdf: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    terms_k: Option<usize>,
    /// Flag pairs seen in more than this many articles...
    #[arg(long)]
    flag_articles: Option<usize>,
    /// ...with more than this many mentions in total.
    #[arg(long)]
    flag_mentions: Option<u64>,
    /// Use the sample-adjusted skewness estimator.
    #[arg(long)]
    skew_adjusted: bool,
    #[arg(long)]
    outlet: Option<String>,
    /// Earliest article date, inclusive (YYYY-MM-DD).
    #[arg(long)]
    from: Option<NaiveDate>,
    /// Latest article date, inclusive (YYYY-MM-DD).
    #[arg(long)]
    to: Option<NaiveDate>,
    /// Omit the timestamp so repeated runs give identical files.
    #[arg(long)]
    deterministic: bool,
    /// Build a separate alias map for each outlet.
    #[arg(long)]
    per_outlet_anon: bool,
    /// Skip malformed corpus lines instead of failing.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Short tokens to keep in title terms, comma separated.
    #[arg(long, value_delimiter = ',')]
    whitelist: Vec<String>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    blacklist: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    out: Option<PathBuf>,
    trim_hist: Option<f64>,
    trim_rcdf: Option<f64>,
    top_k: Option<usize>,
    terms_k: Option<usize>,
    flag_articles: Option<usize>,
    flag_mentions: Option<u64>,
    skew_adjusted: Option<bool>,
    outlet: Option<String>,
    from: Option<String>,
    to: Option<String>,
    deterministic: Option<bool>,
    per_outlet_anon: Option<bool>,
    lenient: Option<bool>,
    threads: Option<usize>,
    whitelist: Option<Vec<String>>,
}

fn parse_date(field: &str, s: &str) -> Result<NaiveDate, AuditError> {
    s.parse()
        .map_err(|e| AuditError::Config(format!("{field} = {s:?} is not a YYYY-MM-DD date: {e}")))
}

fn load_file_config(path: &Path) -> Result<FileConfig, AuditError> {
    let text = fs::read_to_string(path).map_err(|source| AuditError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| AuditError::Config(format!("{}: {e}", path.display())))
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, AuditError> {
        let file = match &self.config {
            Some(path) => load_file_config(path)?,
            None => FileConfig::default(),
        };
        let mut cfg = RunConfig::default();
        macro_rules! layer {
            ($($field:ident),*) => {$(
                if let Some(v) = file.$field.clone() { cfg.$field = v; }
                if let Some(v) = self.$field.clone() { cfg.$field = v; }
            )*};
        }
        layer!(corpus, blacklist, stopwords, lexicon, out, trim_hist, trim_rcdf, top_k, terms_k);

        if let Some(v) = self.flag_articles.or(file.flag_articles) {
            cfg.flag.articles_over = v;
        }
        if let Some(v) = self.flag_mentions.or(file.flag_mentions) {
            cfg.flag.mentions_over = v;
        }
        if self.skew_adjusted || file.skew_adjusted == Some(true) {
            cfg.skewness = SkewnessEstimator::Adjusted;
        }
        cfg.outlet = self.outlet.clone().or(file.outlet);
        cfg.from = match (self.from, &file.from) {
            (Some(d), _) => Some(d),
            (None, Some(s)) => Some(parse_date("from", s)?),
            _ => None,
        };
        cfg.to = match (self.to, &file.to) {
            (Some(d), _) => Some(d),
            (None, Some(s)) => Some(parse_date("to", s)?),
            _ => None,
        };
        cfg.deterministic = self.deterministic || file.deterministic.unwrap_or(false);
        cfg.per_outlet_anon = self.per_outlet_anon || file.per_outlet_anon.unwrap_or(false);
        cfg.lenient = self.lenient || file.lenient.unwrap_or(false);
        cfg.threads = self.threads.or(file.threads);
        let whitelist: BTreeSet<String> = if self.whitelist.is_empty() {
            file.whitelist.unwrap_or_default().into_iter().collect()
        } else {
            self.whitelist.iter().cloned().collect()
        };
        cfg.whitelist = whitelist;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_json(value: &Value, analysis: &Analysis) -> Result<(), AuditError> {
    audit_json(value, &analysis.forbidden, "stdout")?;
    let text = serde_json::to_string_pretty(value).map_err(|e| AuditError::Config(e.to_string()))?;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{text}");
    Ok(())
}

fn report_skipped(analysis: &Analysis) {
    if !analysis.skipped.is_empty() {
        eprintln!("warning: skipped {} malformed corpus line(s)", analysis.skipped.len());
        for s in analysis.skipped.iter().take(10) {
            eprintln!("  line {}: {}", s.line, s.reason);
        }
    }
}

fn per_outlet(analysis: &Analysis, f: impl Fn(&biasaudit::report::OutletReport) -> Value) -> BTreeMap<String, Value> {
    analysis.reports.iter().map(|r| (r.outlet.clone(), f(r))).collect()
}

fn stage(args: &RunArgs, f: impl Fn(&Analysis) -> Value) -> Result<(), AuditError> {
    let cfg = args.resolve()?;
    let analysis = analyze(&cfg)?;
    report_skipped(&analysis);
    print_json(&f(&analysis), &analysis)
}

fn write_maps(args: &RunArgs, map_dir: &Path) -> Result<(), AuditError> {
    let cfg = args.resolve()?;
    let io = |path: &Path, source| AuditError::Unreadable {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(map_dir).map_err(|e| io(map_dir, e))?;
    let dir = fs::canonicalize(map_dir).map_err(|e| io(map_dir, e))?;
    if let Ok(out) = fs::canonicalize(&cfg.out) {
        if dir.starts_with(&out) {
            return Err(AuditError::Config(format!(
                "refusing to write the alias map inside the report directory {}",
                out.display()
            )));
        }
    }
    let prepared = prepare(&cfg)?;
    let maps = match &prepared.maps {
        AuthorMaps::Global(map) => vec![("anon_map.csv".to_string(), map)],
        AuthorMaps::PerOutlet(maps) => maps.iter().map(|(o, m)| (format!("anon_map_{o}.csv"), m)).collect(),
    };
    for (name, map) in maps {
        let path = dir.join(name);
        let mut buf = Vec::new();
        map.write_csv(&mut buf)
            .map_err(|e| AuditError::Config(format!("{}: {e}", path.display())))?;
        write_private(&path, &buf).map_err(|e| io(&path, e))?;
        eprintln!("wrote {} aliases to {}", map.len(), path.display());
    }
    Ok(())
}

#[cfg(unix)]
fn write_private(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    use std::os::unix::fs::OpenOptionsExt;
    let mut file = fs::OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .mode(0o600)
        .open(path)?;
    file.write_all(bytes)
}

#[cfg(not(unix))]
fn write_private(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    fs::write(path, bytes)
}

fn run(cli: Cli) -> Result<(), AuditError> {
    match cli.command {
        Command::Audit(args) => {
            let cfg = args.resolve()?;
            let outcome = biasaudit::run_audit(&cfg)?;
            if !outcome.skipped.is_empty() {
                eprintln!("warning: skipped {} malformed corpus line(s)", outcome.skipped.len());
            }
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{}", summary_table(&outcome.reports, Some(&outcome.pooled)));
            let _ = writeln!(
                stdout,
                "wrote {} report files and {} plot specs to {}",
                outcome.manifest.len() + 1,
                outcome.plots.len(),
                cfg.out.display()
            );
            Ok(())
        }
        Command::Stats(args) => stage(&args, |a| {
            json!({
                "outlets": per_outlet(a, |r| json!(r.summary)),
                "pooled": a.pooled,
            })
        }),
        Command::Bias(args) => stage(&args, |a| {
            json!(per_outlet(a, |r| json!({
                "top_mentions": r.top_mentions,
                "repetition": r.repetition,
                "flagged_pairs": r.repetition.iter().map(|p| p.flagged_count()).sum::<usize>(),
            })))
        }),
        Command::Topics(args) => stage(&args, |a| json!(per_outlet(a, |r| json!(r.terms)))),
        Command::Sentiment(args) => stage(&args, |a| json!(per_outlet(a, |r| json!(r.sentiment)))),
        Command::Anonmap { run, map_dir } => write_maps(&run, &map_dir),
        Command::Synth {
            out,
            seed,
            articles_per_outlet,
        } => {
            let spec = FixtureSpec {
                seed,
                articles_per_outlet,
                ..FixtureSpec::default()
            };
            let corpus = generate(spec);
            let io = |source| AuditError::Unreadable {
                path: out.clone(),
                source,
            };
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(io)?;
            }
            let file = fs::File::create(&out).map_err(io)?;
            let mut writer = std::io::BufWriter::new(file);
            corpus.write_jsonl(&mut writer).map_err(io)?;
            writer.flush().map_err(io)?;
            eprintln!("wrote {} articles to {}", corpus.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                if !err.to_string().contains(&cause.to_string()) {
                    eprintln!("  caused by: {cause}");
                }
                source = cause.source();
            }
            if err.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use biasaudit::bias::FlagRule;

    fn args(extra: &[&str]) -> RunArgs {
        let mut argv = vec!["biasaudit", "audit"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Audit(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_resolve() {
        let cfg = args(&[]).resolve().unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn flags_map_onto_config() {
        let cfg = args(&[
            "--trim-hist",
            "0.02",
            "--trim-rcdf",
            "0.01",
            "--top-k",
            "5",
            "--terms-k",
            "7",
            "--flag-articles",
            "3",
            "--flag-mentions",
            "9",
            "--skew-adjusted",
            "--outlet",
            "wired_like",
            "--from",
            "2020-01-01",
            "--to",
            "2021-12-31",
            "--deterministic",
            "--per-outlet-anon",
            "--whitelist",
            "AI,VR",
        ])
        .resolve()
        .unwrap();
        assert_eq!(cfg.trim_hist, 0.02);
        assert_eq!(cfg.trim_rcdf, 0.01);
        assert_eq!((cfg.top_k, cfg.terms_k), (5, 7));
        assert_eq!(
            cfg.flag,
            FlagRule {
                articles_over: 3,
                mentions_over: 9
            }
        );
        assert_eq!(cfg.skewness, SkewnessEstimator::Adjusted);
        assert_eq!(cfg.outlet.as_deref(), Some("wired_like"));
        assert_eq!(cfg.from, NaiveDate::from_ymd_opt(2020, 1, 1));
        assert!(cfg.deterministic && cfg.per_outlet_anon);
        assert_eq!(cfg.whitelist.len(), 2);
    }

    #[test]
    fn cli_overrides_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "top-k = 3\nterms-k = 4\nflag-articles = 8\nfrom = \"2019-05-01\"\ndeterministic = true\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cfg = args(&["--config", p, "--top-k", "6"]).resolve().unwrap();
        assert_eq!(cfg.top_k, 6);
        assert_eq!(cfg.terms_k, 4);
        assert_eq!(cfg.flag.articles_over, 8);
        assert_eq!(cfg.from, NaiveDate::from_ymd_opt(2019, 5, 1));
        assert!(cfg.deterministic);
        let cfg = args(&["--config", p, "--flag-articles", "2"]).resolve().unwrap();
        assert_eq!(cfg.flag.articles_over, 2);
    }

    #[test]
    fn unknown_config_key_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "top_k = 3\n").unwrap();
        let err = args(&["--config", path.to_str().unwrap()]).resolve().unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn invalid_trim_rejected() {
        assert!(args(&["--trim-hist", "1.5"]).resolve().is_err());
    }
}
