//! Command-line front end: generation, analysis, fitting and table
//! reproduction. Every output file gets a `.meta.json` sidecar holding the
//! run configuration.

pub mod reproduce;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wideca::generators::{
    embed_signal, gen_powerlaw_boolean, gen_randomwalk_signal, gen_uniform, MarginalSource,
    MarginalSpec, STANDIN_EXPONENT, STANDIN_K_MIN,
};
use wideca::matrix::{format_value, load_matrix, load_values, save_matrix, save_values};
use wideca::powerlaw::{ccdf, fit_ccdf, fit_exponent, FitOptions, PowerLawFit};
use wideca::{
    concentration_report, decompose, DecomposeOptions, ErrorKind, FrequencyModel, MatrixFormat,
    ReportRecord, SignalSeries,
};

pub use reproduce::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "wideca", version, about = "Correspondence analysis of very wide count matrices")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic matrix or signal.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Turn a signal into a matrix of sliding windows.
    Embed(EmbedArgs),
    /// Decompose a matrix and report how its inertia concentrates.
    Analyze(AnalyzeArgs),
    /// Fit a power law to the complementary CDF of some values.
    Fit(FitArgs),
    /// Rerun one of the benchmark tables over several seeds.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenCommand {
    /// Dense matrix of independent uniform [0, 1) values.
    Uniform(GenUniformArgs),
    /// Boolean matrix with power-law column sums.
    Powerlaw(GenPowerlawArgs),
    /// Quantized random walk with long constant runs.
    Signal(GenSignalArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenUniformArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "dense-csv")]
    pub format: MatrixFormat,
    /// Allow matrices above the default cell budget.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenPowerlawArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// Density exponent of the column-sum law.
    #[arg(long, default_value_t = STANDIN_EXPONENT)]
    pub exponent: f64,
    /// Smallest column sum the law can produce.
    #[arg(long, default_value_t = STANDIN_K_MIN)]
    pub k_min: usize,
    /// Resample column sums from this file (one integer per line) instead.
    #[arg(long)]
    pub marginals: Option<PathBuf>,
    /// Multiply every drawn column sum by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub marginal_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "triplet")]
    pub format: MatrixFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenSignalArgs {
    #[arg(long)]
    pub len: usize,
    #[arg(long, default_value_t = 6800.0)]
    pub start: f64,
    #[arg(long, default_value_t = 0.9)]
    pub p_repeat: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedArgs {
    /// Signal file, one value per line.
    pub signal: PathBuf,
    #[arg(long)]
    pub windows: usize,
    #[arg(long)]
    pub stride: usize,
    #[arg(long)]
    pub length: usize,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "dense-csv")]
    pub format: MatrixFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<MatrixFormat>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub include_trivial: bool,
    /// Relative eigenvalue cutoff.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// JSON report path; the CSV goes next to it. Prints JSON when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitInput {
    /// Column sums of a matrix.
    Matrix,
    /// One value per line.
    Values,
    /// Precomputed `x,ccdf` pairs, one per line.
    Points,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FitInput::Values)]
    pub kind: FitInput,
    /// Matrix format for `--kind matrix`; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<MatrixFormat>,
    #[arg(long, default_value_t = 1.0)]
    pub x_min: f64,
    /// Upper end of the fit window; defaults to the 99th percentile
    /// (largest x for points input).
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Shift added to x before taking logs; 0.5 for matrix column sums,
    /// 0 otherwise.
    #[arg(long)]
    pub offset: Option<f64>,
    /// Also write the CCDF and its log-log coordinates here.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub table: Table,
    /// Column counts; each table has its own default list.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First seed; runs use `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub allow_large: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub include_trivial: bool,
    /// Multiply drawn column sums by this factor (tables 3 and 4).
    #[arg(long, default_value_t = 1.0)]
    pub marginal_scale: f64,
    /// CSV output; printed when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub version: &'static str,
    pub workers: usize,
    pub command: Command,
}

impl Cli {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            version: VERSION,
            workers: self.workers,
            command: self.command.clone(),
        }
    }
}

/// Exit status for an error: 1 validation, 2 numerical, 3 I/O.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<wideca::Error>() {
            return match e.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Numerical => 2,
                ErrorKind::Io => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}

pub fn run(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .context("building worker pool")?;
    let config = cli.config();
    pool.install(|| match &cli.command {
        Command::Gen(GenCommand::Uniform(a)) => cmd_gen_uniform(a, &config),
        Command::Gen(GenCommand::Powerlaw(a)) => cmd_gen_powerlaw(a, &config),
        Command::Gen(GenCommand::Signal(a)) => cmd_gen_signal(a, &config),
        Command::Embed(a) => cmd_embed(a, &config),
        Command::Analyze(a) => cmd_analyze(a, &config),
        Command::Fit(a) => cmd_fit(a, &config),
        Command::Reproduce(a) => reproduce::cmd_reproduce(a, &config),
    })
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Meta<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    extra: T,
}

pub(crate) fn write_sidecar<T: Serialize>(path: &Path, config: &RunConfig, extra: T) -> Result<()> {
    let meta = Meta { config, extra };
    let text = serde_json::to_string_pretty(&meta)?;
    fs::write(sidecar_path(path), text + "\n")
        .with_context(|| format!("writing metadata for {}", path.display()))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn guess_format(path: &Path, given: Option<MatrixFormat>) -> MatrixFormat {
    given.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("tpl" | "triplet" | "mtx") => MatrixFormat::Triplet,
        _ => MatrixFormat::DenseCsv,
    })
}

#[derive(Serialize)]
struct MatrixInfo {
    n_rows: usize,
    n_cols: usize,
    stored: usize,
}

fn cmd_gen_uniform(a: &GenUniformArgs, config: &RunConfig) -> Result<()> {
    let m = if a.allow_large {
        wideca::generators::gen_uniform_with_budget(a.rows, a.cols, a.seed, u128::MAX)?
    } else {
        gen_uniform(a.rows, a.cols, a.seed)?
    };
    save_matrix(&m, &a.output, a.format).with_context(|| format!("writing {}", a.output.display()))?;
    write_sidecar(
        &a.output,
        config,
        MatrixInfo {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            stored: m.stored_len(),
        },
    )
}

fn cmd_gen_powerlaw(a: &GenPowerlawArgs, config: &RunConfig) -> Result<()> {
    let spec = match &a.marginals {
        Some(path) => MarginalSpec::Empirical {
            values: load_values(path).with_context(|| format!("reading {}", path.display()))?
                .into_iter()
                .map(|v| {
                    if v.fract() != 0.0 || v < 0.0 {
                        bail!("marginal {v} in {} is not a nonnegative integer", path.display())
                    }
                    Ok(v as usize)
                })
                .collect::<Result<_>>()?,
        },
        None => MarginalSpec::Parametric {
            exponent: a.exponent,
            k_min: a.k_min,
        },
    };
    let source = MarginalSource::from_spec(&spec, a.rows)?.scaled(a.marginal_scale)?;
    let m = gen_powerlaw_boolean(a.rows, a.cols, &source, a.seed)?;
    save_matrix(&m, &a.output, a.format).with_context(|| format!("writing {}", a.output.display()))?;
    #[derive(Serialize)]
    struct Extra {
        marginals: MarginalSpec,
        n_rows: usize,
        n_cols: usize,
        ones: usize,
        density: f64,
    }
    let ones = m.stored_len();
    write_sidecar(
        &a.output,
        config,
        Extra {
            marginals: spec,
            n_rows: a.rows,
            n_cols: a.cols,
            ones,
            density: ones as f64 / (a.rows as f64 * a.cols as f64),
        },
    )
}

fn cmd_gen_signal(a: &GenSignalArgs, config: &RunConfig) -> Result<()> {
    let s = gen_randomwalk_signal(a.len, a.start, a.seed, a.p_repeat)?;
    save_values(s.values(), &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    let lo = s.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    #[derive(Serialize)]
    struct Extra {
        len: usize,
        min: f64,
        max: f64,
    }
    write_sidecar(&a.output, config, Extra { len: s.len(), min: lo, max: hi })
}

fn cmd_embed(a: &EmbedArgs, config: &RunConfig) -> Result<()> {
    let sig = SignalSeries::new(
        load_values(&a.signal).with_context(|| format!("reading {}", a.signal.display()))?,
    )?;
    let m = embed_signal(&sig, a.windows, a.stride, a.length)?;
    save_matrix(&m, &a.output, a.format).with_context(|| format!("writing {}", a.output.display()))?;
    write_sidecar(
        &a.output,
        config,
        MatrixInfo {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            stored: m.stored_len(),
        },
    )
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    version: &'static str,
    config: &'a RunConfig,
    elapsed_seconds: f64,
    input: MatrixInfo,
    report: ReportRecord,
    excluded_columns: Vec<usize>,
    eigenvalues: Vec<f64>,
}

fn cmd_analyze(a: &AnalyzeArgs, config: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let m = load_matrix(&a.input, guess_format(&a.input, a.format))
        .with_context(|| format!("reading {}", a.input.display()))?;
    let fm = FrequencyModel::new(&m)?;
    let opts = DecomposeOptions {
        include_trivial: a.include_trivial,
        tol: a.tol,
    };
    let fd = decompose(&fm, opts)?;
    let report = concentration_report(&fm, &fd);
    let record = report.record();
    let out = AnalyzeReport {
        version: VERSION,
        config,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        input: MatrixInfo {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            stored: m.stored_len(),
        },
        excluded_columns: report.excluded_columns,
        eigenvalues: fd.eigenvalues().to_vec(),
        report: record,
    };
    let json = serde_json::to_string_pretty(&out)? + "\n";
    match &a.output {
        Some(path) => {
            write_text(path, &json)?;
            write_sidecar(path, config, ())?;
            let csv = path.with_extension("csv");
            write_text(&csv, &format!("{}\n{}\n", ReportRecord::CSV_HEADER, record.csv_row()))?;
            write_sidecar(&csv, config, ())?;
        }
        None => print!("{json}"),
    }
    Ok(())
}

/// Fit fields as reported: the window is a `[x_min, x_max]` pair.
#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub alpha: f64,
    pub c: f64,
    pub fit_range: [f64; 2],
    pub r_squared: f64,
    pub n_points: usize,
    /// Slope sign, as printed in the tables.
    pub exponent: f64,
    pub offset: f64,
}

impl FitRecord {
    pub fn new(fit: &PowerLawFit, offset: f64) -> Self {
        FitRecord {
            alpha: fit.alpha,
            c: fit.c,
            fit_range: [fit.x_min, fit.x_max],
            r_squared: fit.r_squared,
            n_points: fit.n_points,
            exponent: fit.signed_exponent(),
            offset,
        }
    }
}

fn load_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            let s = s.map(str::trim).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| {
                    wideca::Error::Parse {
                        path: path.to_path_buf(),
                        line: n + 1,
                        msg: format!("expected `x,ccdf`, got {line:?}"),
                    }
                    .into()
                })
        };
        let mut it = line.split(',');
        let x = parse(it.next())?;
        let y = parse(it.next())?;
        pts.push((x, y));
    }
    Ok(pts)
}

fn cmd_fit(a: &FitArgs, config: &RunConfig) -> Result<()> {
    let offset = a.offset.unwrap_or(match a.kind {
        FitInput::Matrix => 0.5,
        _ => 0.0,
    });
    let (points, fit) = match a.kind {
        FitInput::Points => {
            let pts = load_points(&a.input)?;
            let x_max = a
                .x_max
                .unwrap_or_else(|| pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
            let fit = fit_ccdf(&pts, a.x_min, x_max, offset)?;
            (pts, fit)
        }
        kind => {
            let values = if kind == FitInput::Matrix {
                load_matrix(&a.input, guess_format(&a.input, a.format))
                    .with_context(|| format!("reading {}", a.input.display()))?
                    .column_sums()
            } else {
                load_values(&a.input).with_context(|| format!("reading {}", a.input.display()))?
            };
            let opts = FitOptions {
                x_min: a.x_min,
                x_max: a.x_max,
                offset,
            };
            let fit = fit_exponent(&values, &opts)?;
            (ccdf(&values)?, fit)
        }
    };
    if let Some(path) = &a.points {
        let mut out = String::from("x,ccdf,log_x,log_ccdf\n");
        for &(x, p) in points.iter().filter(|&&(x, p)| p > 0.0 && x + offset > 0.0) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_value(x),
                format_value(p),
                format_value((x + offset).ln()),
                format_value(p.ln())
            ));
        }
        write_text(path, &out)?;
        write_sidecar(path, config, ())?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        version: &'static str,
        config: &'a RunConfig,
        fit: FitRecord,
    }
    let json = serde_json::to_string_pretty(&Out {
        version: VERSION,
        config,
        fit: FitRecord::new(&fit, offset),
    })? + "\n";
    match &a.output {
        Some(path) => {
            write_text(path, &json)?;
            write_sidecar(path, config, ())?;
        }
        None => {
            std::io::stdout().write_all(json.as_bytes())?;
        }
    }
    Ok(())
}
