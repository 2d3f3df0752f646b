//! Seeded reruns of the benchmark tables.

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;
use wideca::generators::{
    embed_signal, gen_powerlaw_boolean, gen_powerlaw_marginals, gen_randomwalk_signal,
    gen_uniform, MarginalSource, MarginalSpec, STANDIN_EXPONENT, STANDIN_K_MIN,
};
use wideca::matrix::format_value;
use wideca::powerlaw::{fit_exponent, FitOptions, PowerLawFit};
use wideca::stats::mean;
use wideca::{
    concentration_report, decompose, CountMatrix, DecomposeOptions, FrequencyModel, ReportRecord,
};

use crate::{write_sidecar, write_text, ReproduceArgs, RunConfig};

pub const UNIFORM_ROWS: usize = 86;
pub const SIGNAL_LEN: usize = 95_011;
pub const SIGNAL_START: f64 = 6800.0;
pub const SIGNAL_P_REPEAT: f64 = 0.9;
pub const SIGNAL_WINDOWS: usize = 86;
pub const SIGNAL_STRIDE: usize = 1000;
pub const POWERLAW_ROWS: usize = 425;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Table {
    /// Uniform clouds of 86 points.
    #[value(name = "1")]
    #[serde(rename = "1")]
    Uniform,
    /// Sliding windows over a synthetic quantized random walk.
    #[value(name = "2-synthetic")]
    #[serde(rename = "2-synthetic")]
    Signal,
    /// Power-law exponent of generated column sums.
    #[value(name = "3")]
    #[serde(rename = "3")]
    Exponent,
    /// Concentration of generated power-law presence data.
    #[value(name = "4")]
    #[serde(rename = "4")]
    Presence,
}

impl Table {
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            Table::Uniform | Table::Signal => vec![100, 1000, 10_000],
            Table::Exponent => vec![1052, 10_520, 105_200, 1_052_000],
            Table::Presence => vec![1052, 10_520, 105_200],
        }
    }

    /// Widest run allowed without `--allow-large`.
    pub fn large_above(self) -> usize {
        match self {
            Table::Uniform | Table::Signal => 10_000,
            Table::Exponent => usize::MAX,
            Table::Presence => 105_200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub include_trivial: bool,
    pub marginal_scale: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            include_trivial: true,
            marginal_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum SeedResult {
    Report(ReportRecord),
    Fit {
        alpha: f64,
        r_squared: f64,
        n_points: usize,
        ones: usize,
        density: f64,
    },
}

impl SeedResult {
    pub fn report(&self) -> Option<&ReportRecord> {
        match self {
            SeedResult::Report(r) => Some(r),
            SeedResult::Fit { .. } => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            SeedResult::Fit { alpha, .. } => Some(*alpha),
            SeedResult::Report(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DimResult {
    pub dim: usize,
    pub seeds: Vec<u64>,
    pub results: Vec<SeedResult>,
}

impl DimResult {
    pub fn reports(&self) -> Vec<&ReportRecord> {
        self.results.iter().filter_map(SeedResult::report).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.results.iter().filter_map(SeedResult::alpha).collect()
    }
}

fn powerlaw_source(settings: &Settings) -> Result<MarginalSource> {
    let spec = MarginalSpec::Parametric {
        exponent: STANDIN_EXPONENT,
        k_min: STANDIN_K_MIN,
    };
    Ok(MarginalSource::from_spec(&spec, POWERLAW_ROWS)?.scaled(settings.marginal_scale)?)
}

fn analyze(m: &CountMatrix, settings: &Settings) -> Result<ReportRecord> {
    let fm = FrequencyModel::new(m)?;
    let fd = decompose(
        &fm,
        DecomposeOptions {
            include_trivial: settings.include_trivial,
            ..Default::default()
        },
    )?;
    Ok(concentration_report(&fm, &fd).record())
}

pub fn run_seed(table: Table, dim: usize, seed: u64, settings: &Settings) -> Result<SeedResult> {
    match table {
        Table::Uniform => {
            let m = gen_uniform(UNIFORM_ROWS, dim, seed)?;
            Ok(SeedResult::Report(analyze(&m, settings)?))
        }
        Table::Signal => {
            let sig = gen_randomwalk_signal(SIGNAL_LEN, SIGNAL_START, seed, SIGNAL_P_REPEAT)?;
            let m = embed_signal(&sig, SIGNAL_WINDOWS, SIGNAL_STRIDE, dim)?;
            Ok(SeedResult::Report(analyze(&m, settings)?))
        }
        Table::Presence => {
            let m = gen_powerlaw_boolean(POWERLAW_ROWS, dim, &powerlaw_source(settings)?, seed)?;
            Ok(SeedResult::Report(analyze(&m, settings)?))
        }
        Table::Exponent => {
            // the matrix's column sums are exactly these draws
            let sums = gen_powerlaw_marginals(dim, &powerlaw_source(settings)?, seed);
            let ones: usize = sums.iter().sum();
            let values: Vec<f64> = sums.into_iter().map(|k| k as f64).collect();
            let fit: PowerLawFit = fit_exponent(&values, &FitOptions::discrete())?;
            Ok(SeedResult::Fit {
                alpha: fit.alpha,
                r_squared: fit.r_squared,
                n_points: fit.n_points,
                ones,
                density: ones as f64 / (POWERLAW_ROWS as f64 * dim as f64),
            })
        }
    }
}

pub fn check_budget(table: Table, dims: &[usize], allow_large: bool) -> Result<()> {
    if allow_large {
        return Ok(());
    }
    if let Some(&d) = dims.iter().find(|&&d| d > table.large_above()) {
        return Err(wideca::Error::InvalidArgument(format!(
            "{d} columns is above the default limit of {} for this table; pass --allow-large",
            table.large_above()
        ))
        .into());
    }
    Ok(())
}

pub fn run_table(
    table: Table,
    dims: &[usize],
    seeds: &[u64],
    settings: &Settings,
    allow_large: bool,
) -> Result<Vec<DimResult>> {
    check_budget(table, dims, allow_large)?;
    dims.iter()
        .map(|&dim| {
            let results = seeds
                .iter()
                .map(|&s| run_seed(table, dim, s, settings))
                .collect::<Result<Vec<_>>>()?;
            Ok(DimResult {
                dim,
                seeds: seeds.to_vec(),
                results,
            })
        })
        .collect()
}

const REPORT_STATS: [&str; 9] = [
    "abs_mean",
    "abs_sd",
    "abs_median",
    "rel_mean",
    "rel_sd",
    "rel_median",
    "max_proj_cols",
    "max_proj_rows",
    "total_inertia",
];

fn report_stats(r: &ReportRecord) -> [f64; 9] {
    [
        r.abs_mean,
        r.abs_sd,
        r.abs_median,
        r.rel_mean,
        r.rel_sd,
        r.rel_median,
        r.max_proj_cols,
        r.max_proj_rows,
        r.total_inertia,
    ]
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Seed means in the table's own columns, then per-seed min and max.
pub fn table_csv(table: Table, rows: &[DimResult]) -> String {
    let mut out = String::new();
    if table == Table::Exponent {
        push_row(
            &mut out,
            &["dim", "seeds", "exponent", "exponent_min", "exponent_max", "r_squared", "ones", "density"]
                .map(String::from),
        );
        for d in rows {
            let alphas = d.alphas();
            let (lo, hi) = min_max(&alphas);
            let pick = |f: fn(&SeedResult) -> f64| mean(&d.results.iter().map(f).collect::<Vec<_>>());
            let r2 = pick(|s| match s {
                SeedResult::Fit { r_squared, .. } => *r_squared,
                _ => f64::NAN,
            });
            let ones = pick(|s| match s {
                SeedResult::Fit { ones, .. } => *ones as f64,
                _ => f64::NAN,
            });
            let density = pick(|s| match s {
                SeedResult::Fit { density, .. } => *density,
                _ => f64::NAN,
            });
            push_row(
                &mut out,
                &[
                    d.dim.to_string(),
                    d.seeds.len().to_string(),
                    format_value(-mean(&alphas)),
                    format_value(-hi),
                    format_value(-lo),
                    format_value(r2),
                    format_value(ones),
                    format_value(density),
                ],
            );
        }
        return out;
    }
    let mut header = vec!["dim".to_string(), "seeds".to_string()];
    header.extend(REPORT_STATS.iter().map(|s| s.to_string()));
    header.push("nu".into());
    for s in REPORT_STATS {
        header.push(format!("{s}_min"));
        header.push(format!("{s}_max"));
    }
    push_row(&mut out, &header);
    for d in rows {
        let stats: Vec<[f64; 9]> = d.reports().into_iter().map(report_stats).collect();
        let column = |k: usize| stats.iter().map(|s| s[k]).collect::<Vec<_>>();
        let mut cells = vec![d.dim.to_string(), d.seeds.len().to_string()];
        for k in 0..REPORT_STATS.len() {
            cells.push(format_value(mean(&column(k))));
        }
        let nus: Vec<f64> = d.reports().iter().map(|r| r.nu as f64).collect();
        cells.push(format_value(mean(&nus)));
        for k in 0..REPORT_STATS.len() {
            let (lo, hi) = min_max(&column(k));
            cells.push(format_value(lo));
            cells.push(format_value(hi));
        }
        push_row(&mut out, &cells);
    }
    out
}

pub(crate) fn cmd_reproduce(a: &ReproduceArgs, config: &RunConfig) -> Result<()> {
    let dims = a.dims.clone().unwrap_or_else(|| a.table.default_dims());
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.seed + i).collect();
    let settings = Settings {
        include_trivial: a.include_trivial,
        marginal_scale: a.marginal_scale,
    };
    check_budget(a.table, &dims, a.allow_large)?;
    let mut rows = Vec::new();
    for &dim in &dims {
        let start = std::time::Instant::now();
        rows.extend(run_table(a.table, &[dim], &seeds, &settings, true)?);
        eprintln!("dim {dim}: {} seeds in {:.1} s", seeds.len(), start.elapsed().as_secs_f64());
    }
    if matches!(a.table, Table::Exponent | Table::Presence) && a.marginal_scale == 1.0 {
        eprintln!(
            "note: column sums are resampled directly, so density does not fall with width; \
             use --marginal-scale to shrink them"
        );
    }
    let csv = table_csv(a.table, &rows);
    match &a.output {
        Some(path) => {
            write_text(path, &csv)?;
            #[derive(Serialize)]
            struct Extra<'a> {
                settings: Settings,
                per_seed: &'a [DimResult],
            }
            write_sidecar(path, config, Extra { settings, per_seed: &rows })?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}
