use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use granimpute::baselines::{impurity_sweep, ImputerKind, SweepSettings};
use granimpute::data_model::{
    decode_categoricals, encode_categoricals, load_path, write_csv, Format, MissingTokens, Table,
};
use granimpute::imputer::{GranularConfig, GranularImputer};
use granimpute::pipeline::{run_pipeline, ClassifierKind, PipelineConfig};

/// Missing-value imputation with granular semantics, and a bankruptcy
/// prediction pipeline.
#[derive(Parser, Debug)]
#[command(name = "granimpute", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summarize a dataset: shape, missing cells per column, class balance.
    Stats(StatsArgs),
    /// Fill missing cells with the granular imputer.
    Impute(ImputeArgs),
    /// Hide observed cells at random and score imputers on recovering them.
    MaskBench(MaskBenchArgs),
    /// Impute, select features, balance, and evaluate classifiers.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV or ARFF file.
    #[arg(long)]
    input: PathBuf,
    /// Overrides detection from the file extension.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Comma-separated cell values read as missing (case-insensitive).
    #[arg(long, value_delimiter = ',', default_value = ",?,NaN,na")]
    missing_tokens: Vec<String>,
    /// Label column; defaults to a column named `class` if present.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args, Debug)]
struct GranuleArgs {
    /// Semantic features per granule.
    #[arg(long, default_value_t = granimpute::granule::DEFAULT_DELTA)]
    delta: usize,
    /// Rows per granule.
    #[arg(long, default_value_t = granimpute::granule::DEFAULT_ETA)]
    eta: usize,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ImputeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    granule: GranuleArgs,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON lines, one record per imputed cell.
    #[arg(long)]
    dump_provenance: Option<PathBuf>,
    /// JSON lines, one granule (seed cell, rows, features) per imputed cell.
    #[arg(long)]
    dump_granules: Option<PathBuf>,
    /// Feature correlation matrix as CSV.
    #[arg(long)]
    dump_corr: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MaskBenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    granule: GranuleArgs,
    /// Masking rates, each in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3")]
    rates: Vec<f64>,
    /// Any of gs, mean, knn, mice.
    #[arg(long, value_delimiter = ',', default_value = "gs,mean,knn,mice")]
    imputers: Vec<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Report JSON; standard output when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    granule: GranuleArgs,
    /// Any of logreg, knn, dtree, rforest, gboost, nnet. An empty value runs none.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "logreg,knn,dtree,rforest,gboost,nnet"
    )]
    classifiers: Vec<String>,
    #[arg(long, default_value_t = 16)]
    k_features: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Report JSON; standard output when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Directory for one `<classifier>_roc.csv` per classifier.
    #[arg(long)]
    dump_roc: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: granimpute::Error| e.to_string())
}

/// Bad flags or flag combinations, reported with exit code 1.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn granular_config(g: &GranuleArgs) -> Result<GranularConfig> {
    let cfg = GranularConfig::new(g.delta, g.eta);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn load(a: &InputArgs) -> Result<Table> {
    let tokens = MissingTokens::new(&a.missing_tokens);
    let t = load_path(&a.input, a.format, &tokens)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let t = match &a.label {
        Some(name) => t.with_label(name)?,
        None => t,
    };
    log::info!(
        "loaded {}: {} rows, {} columns",
        a.input.display(),
        t.n_rows(),
        t.n_cols()
    );
    Ok(t)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ColumnStats<'a> {
    name: &'a str,
    kind: granimpute::data_model::FeatureKind,
    missing: usize,
}

#[derive(Serialize)]
struct ClassCount {
    value: String,
    count: usize,
}

#[derive(Serialize)]
struct DatasetStats<'a> {
    rows: usize,
    features: usize,
    missing_total: usize,
    label: Option<&'a str>,
    classes: Vec<ClassCount>,
    columns: Vec<ColumnStats<'a>>,
}

fn class_counts(t: &Table) -> Vec<ClassCount> {
    let Some(l) = t.label() else {
        return Vec::new();
    };
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    for r in 0..t.n_rows() {
        let key = match t.column(l) {
            granimpute::data_model::Column::Numeric(v) => v[r].map(|x| x.to_string()),
            granimpute::data_model::Column::Categorical(v) => v[r].clone(),
        };
        *counts
            .entry(key.unwrap_or_else(|| "<missing>".into()))
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(value, count)| ClassCount { value, count })
        .collect()
}

fn stats(a: &StatsArgs) -> Result<()> {
    let t = load(&a.input)?;
    let kinds = t.kinds();
    let features = t.feature_indices();
    let s = DatasetStats {
        rows: t.n_rows(),
        features: features.len(),
        missing_total: t.missing_feature_cells(),
        label: t.label().map(|l| t.names()[l].as_str()),
        classes: class_counts(&t),
        columns: features
            .iter()
            .map(|&c| ColumnStats {
                name: &t.names()[c],
                kind: kinds[c],
                missing: (0..t.n_rows()).filter(|&r| t.is_missing(r, c)).count(),
            })
            .collect(),
    };
    if a.json {
        return emit_json(&s, None);
    }
    let mut out = io::stdout().lock();
    writeln!(out, "rows\t{}", s.rows)?;
    writeln!(out, "features\t{}", s.features)?;
    writeln!(out, "missing\t{}", s.missing_total)?;
    if let Some(l) = s.label {
        writeln!(out, "label\t{l}")?;
        for c in &s.classes {
            writeln!(out, "class {}\t{}", c.value, c.count)?;
        }
    }
    for c in s.columns.iter().filter(|c| c.missing > 0) {
        writeln!(out, "missing {}\t{}", c.name, c.missing)?;
    }
    Ok(())
}

fn write_json_lines<T: Serialize>(path: &Path, items: impl Iterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn impute(a: &ImputeArgs) -> Result<()> {
    let cfg = granular_config(&a.granule)?;
    let raw = load(&a.input)?;
    let (encoded, categories) = encode_categoricals(&raw);
    let imputer = GranularImputer::new(&encoded, cfg)?;
    let filled = imputer.run()?;
    log::info!("imputed {} cells", filled.provenance.len());

    if let Some(p) = &a.dump_corr {
        fs::write(p, imputer.correlation().to_csv(&encoded))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.dump_provenance {
        write_json_lines(p, filled.provenance.iter())?;
    }
    if let Some(p) = &a.dump_granules {
        write_json_lines(
            p,
            filled.provenance.iter().filter_map(|r| r.granule.as_ref()),
        )?;
    }
    let out = decode_categoricals(&filled.table, &categories);
    match &a.output {
        Some(p) => write_csv(&out, create(p)?)?,
        None => write_csv(&out, io::stdout().lock())?,
    }
    Ok(())
}

fn mask_bench(a: &MaskBenchArgs) -> Result<()> {
    let cfg = granular_config(&a.granule)?;
    if let Some(r) = a.rates.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        bail!(usage(format!("rate {r} is outside (0, 1)")));
    }
    let imputers = a
        .imputers
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<ImputerKind>().map_err(|e| usage(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (table, _) = encode_categoricals(&load(&a.input)?);
    let settings = SweepSettings {
        granular: cfg,
        ..SweepSettings::default()
    };
    let reports = impurity_sweep(&table, &a.rates, &imputers, a.seed, &settings)?;
    for r in &reports {
        log::info!(
            "rate {} {}: mean error {:.6}",
            r.rate,
            r.imputer.name(),
            r.mean_err
        );
    }
    emit_json(&reports, a.report.as_deref())
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let granular = granular_config(&a.granule)?;
    let classifiers = a
        .classifiers
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.parse::<ClassifierKind>()
                .map_err(|e| usage(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    if a.k_features == 0 {
        bail!(usage("--k-features must be at least 1"));
    }
    let raw = load(&a.input)?;
    let cfg = PipelineConfig {
        granular,
        k_features: a.k_features,
        seed: a.seed,
        classifiers,
        ..PipelineConfig::default()
    };
    let outcome = run_pipeline(&raw, &cfg)?;
    if let Some(dir) = &a.dump_roc {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &outcome.reports {
            let p = dir.join(format!("{}_roc.csv", r.classifier));
            fs::write(&p, r.roc_csv()).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    emit_json(&outcome.reports, a.report.as_deref())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("GRANIMPUTE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| usage(format!("GRANIMPUTE_THREADS must be a number, got {v:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Stats(a) => stats(a),
        Command::Impute(a) => impute(a),
        Command::MaskBench(a) => mask_bench(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
