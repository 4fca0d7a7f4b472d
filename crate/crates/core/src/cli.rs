//! Command-line front end: `count`, `fit`, `eval` and `demo-fisher`.
//!
//! Machine-readable output goes to stdout (or `--out`); diagnostics and the
//! echoed effective configuration go to stderr.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ca::{export_coordinates, fit_linear_ca, read_embeddings, write_embeddings, EmbeddingSet, PointSet};
use crate::corpus::{builtin_stopwords, count_cooccurrences, load_stopwords, slice_tokens, tokenize, CooccurrenceConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, load_wordsim, WordSimDataset};
use crate::gini::{gini_variance, rotated_covariance, Axis};
use crate::kca::{default_ws_alpha, fit_kca, fit_ws_kca_with_exponent, similarity_gamma, KcaMethod};
use crate::tables::{fisher_table, ContingencyTable};

#[derive(Debug, Parser)]
#[command(name = "kca", version, about = "Correspondence analysis and kernel CA for contingency tables and word co-occurrences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count word-context co-occurrences in a text corpus and write a TSV table.
    Count(CountArgs),
    /// Fit embeddings to a TSV table.
    Fit(FitArgs),
    /// Evaluate embeddings against word-similarity datasets.
    Eval(EvalArgs),
    /// Run linear CA on Fisher's eye/hair colour table.
    DemoFisher(DemoArgs),
}

#[derive(Debug, Args)]
pub struct CountArgs {
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Use only the first PERCENT of tokens.
    #[arg(long, value_name = "PERCENT")]
    pub slice: Option<f64>,
    /// Keep the original letter case.
    #[arg(long)]
    pub keep_case: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    pub table: PathBuf,
    /// Flat `key=value` method config; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub shift_k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sw_alpha_row: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sw_alpha_col: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ws_alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ws_beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kpca_alpha: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Stop-word list (defaults to the bundled English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Similarity scores for the `ws` method.
    #[arg(long)]
    pub wordsim: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
}

impl Which {
    fn point_set(self) -> PointSet {
        match self {
            Which::F => PointSet::Row,
            Which::G => PointSet::Col,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub embeddings: PathBuf,
    #[arg(long, required = true)]
    pub wordsim: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Which::F)]
    pub which: Which,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct DemoArgs {
    /// Write the CA coordinates CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodName {
    Linear,
    Gini,
    GTest,
    Sgns,
    KpcaCd,
    Ws,
}

impl std::str::FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => MethodName::Linear,
            "gini" => MethodName::Gini,
            "gtest" => MethodName::GTest,
            "sgns" => MethodName::Sgns,
            "kpca_cd" | "kpca-cd" => MethodName::KpcaCd,
            "ws" => MethodName::Ws,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown method `{other}` (expected linear, gini, gtest, sgns, kpca_cd or ws)"
                )))
            }
        })
    }
}

/// Effective method settings after merging the config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: MethodName,
    pub shift_k: f64,
    pub sw_alpha_row: Option<f64>,
    pub sw_alpha_col: Option<f64>,
    pub ws_alpha: Option<f64>,
    pub ws_beta: f64,
    pub kpca_alpha: f64,
    pub dim: Option<usize>,
    pub exponent: f64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            method: MethodName::Linear,
            shift_k: 1.0,
            sw_alpha_row: None,
            sw_alpha_col: None,
            ws_alpha: None,
            ws_beta: 1.0,
            kpca_alpha: -1.0,
            dim: None,
            exponent: 1.0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(path: &Path, line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid value `{value}` for `{key}`")))
}

impl MethodConfig {
    /// Applies `key=value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(path, i + 1, "expected key=value"));
            };
            let (key, value) = (key.trim(), value.trim());
            let n = i + 1;
            match key {
                "method" => {
                    self.method = value.parse().map_err(|e: Error| Error::parse(path, n, e.to_string()))?
                }
                "shift_k" => self.shift_k = parse_value(path, n, key, value)?,
                "sw_alpha_row" => self.sw_alpha_row = Some(parse_value(path, n, key, value)?),
                "sw_alpha_col" => self.sw_alpha_col = Some(parse_value(path, n, key, value)?),
                "ws_alpha" => self.ws_alpha = Some(parse_value(path, n, key, value)?),
                "ws_beta" => self.ws_beta = parse_value(path, n, key, value)?,
                "kpca_alpha" => self.kpca_alpha = parse_value(path, n, key, value)?,
                "dim" => self.dim = Some(parse_value(path, n, key, value)?),
                "exponent" => self.exponent = parse_value(path, n, key, value)?,
                other => return Err(Error::parse(path, n, format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    /// Config file first, then flags.
    pub fn from_args(args: &FitArgs) -> Result<Self> {
        let mut cfg = MethodConfig::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_text(&text, path)?;
        }
        if let Some(m) = &args.method {
            cfg.method = m.parse()?;
        }
        if let Some(v) = args.shift_k {
            cfg.shift_k = v;
        }
        if args.sw_alpha_row.is_some() {
            cfg.sw_alpha_row = args.sw_alpha_row;
        }
        if args.sw_alpha_col.is_some() {
            cfg.sw_alpha_col = args.sw_alpha_col;
        }
        if args.ws_alpha.is_some() {
            cfg.ws_alpha = args.ws_alpha;
        }
        if let Some(v) = args.ws_beta {
            cfg.ws_beta = v;
        }
        if let Some(v) = args.kpca_alpha {
            cfg.kpca_alpha = v;
        }
        if args.dim.is_some() {
            cfg.dim = args.dim;
        }
        if let Some(v) = args.exponent {
            cfg.exponent = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.method == MethodName::Sgns && !(self.shift_k > 0.0) {
            return Err(Error::InvalidParameter(format!("shift_k must be positive, got {}", self.shift_k)));
        }
        if self.dim == Some(0) {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if self.method == MethodName::Ws && self.uses_stopwords() {
            return Err(Error::InvalidParameter(
                "the ws method does not combine with stop-word kernels".into(),
            ));
        }
        Ok(())
    }

    pub fn uses_stopwords(&self) -> bool {
        self.sw_alpha_row.is_some() || self.sw_alpha_col.is_some()
    }

    fn describe(&self) -> String {
        format!(
            "method={:?} shift_k={} sw_alpha_row={:?} sw_alpha_col={:?} ws_alpha={:?} ws_beta={} kpca_alpha={} dim={:?} exponent={}",
            self.method,
            self.shift_k,
            self.sw_alpha_row,
            self.sw_alpha_col,
            self.ws_alpha,
            self.ws_beta,
            self.kpca_alpha,
            self.dim,
            self.exponent
        )
    }
}

/// Writes to `--out` when given, otherwise to `stdout`.
fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn cmd_count(args: &CountArgs, stdout: &mut dyn Write) -> Result<ContingencyTable> {
    let cfg = CooccurrenceConfig {
        window: args.window,
        min_count: args.min_count,
        max_vocab: args.max_vocab,
        lowercase: !args.keep_case,
    };
    eprintln!(
        "count: corpus={} window={} min_count={} max_vocab={:?} slice={:?} lowercase={}",
        args.corpus.display(),
        cfg.window,
        cfg.min_count,
        cfg.max_vocab,
        args.slice,
        cfg.lowercase
    );
    let text = fs::read_to_string(&args.corpus).map_err(|e| Error::io(&args.corpus, e))?;
    let tokens = tokenize(&text, cfg.lowercase);
    let tokens = match args.slice {
        Some(p) => slice_tokens(&tokens, p),
        None => &tokens[..],
    };
    let table = count_cooccurrences(tokens, &cfg)?;
    eprintln!("count: {} tokens, vocabulary {}, total {}", tokens.len(), table.nrows(), table.n());
    emit(args.out.as_deref(), stdout, &table.to_tsv())?;
    Ok(table)
}

fn stopword_set(path: Option<&Path>) -> Result<HashSet<String>> {
    match path {
        Some(p) => load_stopwords(p),
        None => Ok(builtin_stopwords()),
    }
}

fn merged_scores(paths: &[PathBuf]) -> Result<Vec<(String, String, f64)>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(load_wordsim(p)?.triples);
    }
    Ok(WordSimDataset::new(all)?.triples)
}

/// Fits the configured method to a table.
pub fn fit_with_config(
    table: &ContingencyTable,
    cfg: &MethodConfig,
    stopwords: Option<&Path>,
    wordsim: &[PathBuf],
) -> Result<EmbeddingSet> {
    let max = table.nrows().min(table.ncols());
    let k = cfg.dim.unwrap_or(100).min(max);
    if cfg.dim.is_some_and(|d| d > max) {
        log::warn!("dim {} exceeds table rank bound {max}; using {max}", cfg.dim.unwrap());
    }

    let base = match cfg.method {
        MethodName::Linear => KcaMethod::linear_ca(),
        MethodName::Gini => KcaMethod::gini(),
        MethodName::GTest => KcaMethod::gtest(),
        MethodName::Sgns => KcaMethod::sgns(cfg.shift_k),
        MethodName::KpcaCd => KcaMethod::kpca_cd(cfg.kpca_alpha),
        MethodName::Ws => {
            if wordsim.is_empty() {
                return Err(Error::InvalidParameter("the ws method needs --wordsim scores".into()));
            }
            let scores = merged_scores(wordsim)?;
            let max_score = scores.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
            let alpha = cfg.ws_alpha.unwrap_or_else(|| default_ws_alpha(max_score));
            let gr = similarity_gamma(table.row_labels(), &scores, alpha, cfg.ws_beta);
            let gc = similarity_gamma(table.col_labels(), &scores, alpha, cfg.ws_beta);
            return fit_ws_kca_with_exponent(table, &gr, &gc, k, cfg.exponent);
        }
    };
    let method = if cfg.uses_stopwords() {
        let words = stopword_set(stopwords)?;
        base.with_stopwords(
            &words,
            cfg.sw_alpha_row.unwrap_or(0.0),
            cfg.sw_alpha_col.unwrap_or(0.0),
        )
    } else {
        base
    }
    .with_exponent(cfg.exponent);

    if method == KcaMethod::linear_ca() {
        fit_linear_ca(table, k)
    } else {
        fit_kca(table, &method, k)
    }
}

pub fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<EmbeddingSet> {
    let cfg = MethodConfig::from_args(args)?;
    eprintln!("fit: table={} {}", args.table.display(), cfg.describe());
    let table = ContingencyTable::read_tsv(&args.table)?;
    let e = fit_with_config(&table, &cfg, args.stopwords.as_deref(), &args.wordsim)?;
    match &args.out {
        Some(path) => write_embeddings(&e, path)?,
        None => emit(None, stdout, &crate::ca::embeddings_to_string(&e))?,
    }
    Ok(e)
}

/// One line of the evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub dataset: String,
    pub result: std::result::Result<(f64, usize, usize), String>,
}

impl ReportRow {
    fn to_tsv(&self) -> String {
        match &self.result {
            Ok((rho, used, skipped)) => {
                format!("{}\t{}\t{rho:.6}\t{used}\t{skipped}\n", self.method, self.dataset)
            }
            Err(_) => format!("{}\t{}\terror\t0\t0\n", self.method, self.dataset),
        }
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Evaluates one embedding set against each dataset. Failures become error
/// rows. Rows are sorted by dataset name.
pub fn evaluate_datasets(e: &EmbeddingSet, which: Which, paths: &[PathBuf]) -> Vec<ReportRow> {
    let method = format!("{}_{:?}", e.method_tag, which);
    let mut rows: Vec<ReportRow> = paths
        .iter()
        .map(|p| {
            let result = load_wordsim(p)
                .and_then(|d| evaluate(e, which.point_set(), &d))
                .map(|r| (r.spearman_rho, r.pairs_used, r.pairs_skipped))
                .map_err(|err| err.to_string());
            ReportRow {
                method: method.clone(),
                dataset: dataset_name(p),
                result,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    rows
}

pub const REPORT_HEADER: &str = "method\tdataset\trho\tused\tskipped\n";

/// Returns `true` when every dataset produced a correlation.
pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<bool> {
    eprintln!(
        "eval: embeddings={} which={:?} datasets={:?}",
        args.embeddings.display(),
        args.which,
        args.wordsim
    );
    let e = read_embeddings(&args.embeddings)?;
    let rows = evaluate_datasets(&e, args.which, &args.wordsim);
    let mut text = REPORT_HEADER.to_string();
    let mut ok = true;
    for row in &rows {
        if let Err(msg) = &row.result {
            eprintln!("eval: {}: {msg}", row.dataset);
            ok = false;
        }
        text.push_str(&row.to_tsv());
    }
    emit(args.out.as_deref(), stdout, &text)?;
    Ok(ok)
}

fn join(v: impl Iterator<Item = f64>) -> String {
    v.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn cmd_demo_fisher(args: &DemoArgs, stdout: &mut dyn Write) -> Result<EmbeddingSet> {
    let t = fisher_table();
    let rc = rotated_covariance(&t)?;
    let e = fit_linear_ca(&t, 2)?;
    let summary = format!(
        "n\t{}\nr\t{}\nc\t{}\ngini_eye\t{:.6}\ngini_hair\t{:.6}\nrotated_covariance\t{:.9}\nsingular_values\t{}\n",
        t.n(),
        join(t.r().iter().copied()),
        join(t.c().iter().copied()),
        gini_variance(&t, Axis::Row),
        gini_variance(&t, Axis::Col),
        rc.value,
        join(e.singular_values.iter().copied()),
    );
    emit(None, stdout, &summary)?;
    if let Some(path) = &args.out {
        export_coordinates(&e, path)?;
        eprintln!("demo-fisher: coordinates written to {}", path.display());
    }
    Ok(e)
}

/// Runs a parsed command; the boolean is `false` when `eval` produced error rows.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Count(a) => cmd_count(a, stdout).map(|_| true),
        Command::Fit(a) => cmd_fit(a, stdout).map(|_| true),
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::DemoFisher(a) => cmd_demo_fisher(a, stdout).map(|_| true),
    }
}
