//! Inertia decomposition and contributions of column points.
//!
//! For a column `j` with mass `f_j` and factor projections `G_a(j)`:
//! - absolute contribution to axis `a`: `f_j G_a(j)^2`; summed over the
//!   retained axes this is `f_j ρ²(j)`;
//! - relative contribution to axis `a`: `f_j G_a(j)^2 / λ_a`, which sums to
//!   one over columns for every axis, so the mean total relative
//!   contribution is exactly `ν / |J|`.
//!
//! With the trivial axis kept, `ρ²(j) = 1 + ρ_c²(j)` where `ρ_c²` is the
//! chi-squared distance of the column profile to the centroid.

use serde::{Deserialize, Serialize};

use crate::decompose::{fold_column_projections, project_single_column, FactorDecomposition};
use crate::error::{Axis, Error, Result};
use crate::frequency::FrequencyModel;
use crate::stats::Summary;

fn check_index(axis: Axis, index: usize, len: usize) -> Result<()> {
    if index >= len {
        Err(Error::OutOfRange { axis, index, len })
    } else {
        Ok(())
    }
}

/// Centered squared chi-squared distance of column `col` to the centroid,
/// `Σ_i (f_ij / f_j - f_i)^2 / f_i`.
pub fn chi2_distance_to_centroid(fm: &FrequencyModel<'_>, col: usize) -> Result<f64> {
    check_index(Axis::Column, col, fm.n_cols())?;
    let c = fm.col_sums()[col];
    if c == 0.0 {
        return Err(Error::ZeroMass {
            axis: Axis::Column,
            index: col,
        });
    }
    let mut profile = vec![0.0; fm.n_rows()];
    let (rows, values) = fm.matrix().column_entries(col);
    for (r, v) in rows.into_iter().zip(values) {
        profile[r as usize] = v / c;
    }
    Ok(weighted_distance(&profile, fm.row_masses()))
}

/// Centered squared chi-squared distance of row `row` to the centroid,
/// `Σ_j (f_ij / f_i - f_j)^2 / f_j`.
pub fn chi2_row_distance_to_centroid(fm: &FrequencyModel<'_>, row: usize) -> Result<f64> {
    check_index(Axis::Row, row, fm.n_rows())?;
    let r = fm.row_sums()[row];
    if r == 0.0 {
        return Err(Error::ZeroMass {
            axis: Axis::Row,
            index: row,
        });
    }
    let profile: Vec<f64> = fm.matrix().row_dense(row).iter().map(|k| k / r).collect();
    Ok(weighted_distance(&profile, fm.col_masses()))
}

fn weighted_distance(profile: &[f64], masses: &[f64]) -> f64 {
    profile
        .iter()
        .zip(masses)
        .filter(|(_, &m)| m > 0.0)
        .map(|(p, m)| (p - m) * (p - m) / m)
        .sum()
}

/// Per-axis contributions of one point and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisContributions {
    pub per_axis: Vec<f64>,
    pub total: f64,
}

/// `f_j G_a(j)^2` for every retained axis; the total is `f_j ρ²(j)`.
pub fn absolute_contribution(
    fm: &FrequencyModel<'_>,
    fd: &FactorDecomposition,
    col: usize,
) -> Result<AxisContributions> {
    let g = project_single_column(fm, fd, col)?;
    let mass = fm.col_masses()[col];
    let per_axis: Vec<f64> = g.iter().map(|x| mass * x * x).collect();
    let total = per_axis.iter().sum();
    Ok(AxisContributions { per_axis, total })
}

/// `f_j G_a(j)^2 / λ_a` for every retained axis.
pub fn relative_contribution(
    fm: &FrequencyModel<'_>,
    fd: &FactorDecomposition,
    col: usize,
) -> Result<AxisContributions> {
    let abs = absolute_contribution(fm, fd, col)?;
    let per_axis: Vec<f64> = abs
        .per_axis
        .iter()
        .zip(fd.eigenvalues())
        .map(|(a, lam)| a / lam)
        .collect();
    let total = per_axis.iter().sum();
    Ok(AxisContributions { per_axis, total })
}

/// Column-cloud concentration statistics from one streaming pass.
#[derive(Debug, Clone)]
pub struct ContributionReport {
    /// `n_cols` of the input, zero-mass columns included.
    pub dim: usize,
    /// `f_j ρ²(j)` for each column with mass, ascending column order.
    pub per_column_absolute: Vec<f64>,
    /// `Σ_a f_j G_a(j)^2 / λ_a` for each column with mass.
    pub per_column_relative: Vec<f64>,
    pub absolute: Summary,
    pub relative: Summary,
    /// Largest `|G_a(j)|` over columns and non-trivial axes (the headline number).
    pub max_proj_cols: f64,
    /// Largest `|F_a(i)|` over rows and non-trivial axes.
    pub max_proj_rows: f64,
    /// `Σ_a λ_a` over the retained axes.
    pub total_inertia: f64,
    pub nu: usize,
    pub n_cols_effective: usize,
    pub excluded_columns: Vec<usize>,
}

struct BlockStats {
    abs: Vec<f64>,
    rel: Vec<f64>,
    max_proj: f64,
}

pub fn concentration_report(fm: &FrequencyModel<'_>, fd: &FactorDecomposition) -> ContributionReport {
    let inv_lambda: Vec<f64> = fd.eigenvalues().iter().map(|l| 1.0 / l).collect();
    let skip = usize::from(fd.include_trivial());
    let masses = fm.col_masses();
    let blocks = fold_column_projections(
        fm,
        fd,
        || BlockStats {
            abs: Vec::new(),
            rel: Vec::new(),
            max_proj: 0.0,
        },
        |acc, j, g| {
            let mut rho2 = 0.0;
            let mut rel = 0.0;
            for (x, il) in g.iter().zip(&inv_lambda) {
                let sq = x * x;
                rho2 += sq;
                rel += sq * il;
            }
            for x in &g[skip..] {
                acc.max_proj = acc.max_proj.max(x.abs());
            }
            acc.abs.push(masses[j] * rho2);
            acc.rel.push(masses[j] * rel);
        },
    );
    let n_eff = fm.n_cols_effective();
    let mut per_column_absolute = Vec::with_capacity(n_eff);
    let mut per_column_relative = Vec::with_capacity(n_eff);
    let mut max_proj_cols: f64 = 0.0;
    for b in blocks {
        per_column_absolute.extend(b.abs);
        per_column_relative.extend(b.rel);
        max_proj_cols = max_proj_cols.max(b.max_proj);
    }
    ContributionReport {
        dim: fm.n_cols(),
        absolute: Summary::of(&per_column_absolute),
        relative: Summary::of(&per_column_relative),
        per_column_absolute,
        per_column_relative,
        max_proj_cols,
        max_proj_rows: fd.max_abs_row_projection(),
        total_inertia: fd.total_inertia(),
        nu: fd.nu(),
        n_cols_effective: n_eff,
        excluded_columns: fm.zero_cols().to_vec(),
    }
}

/// The serialized summary of a [`ContributionReport`]; field order is the
/// JSON and CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub dim: usize,
    pub abs_mean: f64,
    pub abs_sd: f64,
    pub abs_median: f64,
    pub rel_mean: f64,
    pub rel_sd: f64,
    pub rel_median: f64,
    pub max_proj_cols: f64,
    pub max_proj_rows: f64,
    pub total_inertia: f64,
    pub nu: usize,
    pub n_cols_effective: usize,
}

impl ReportRecord {
    pub const CSV_HEADER: &'static str = "dim,abs_mean,abs_sd,abs_median,rel_mean,rel_sd,rel_median,\
max_proj_cols,max_proj_rows,total_inertia,nu,n_cols_effective";

    pub fn csv_row(&self) -> String {
        let f = crate::matrix::format_value;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dim,
            f(self.abs_mean),
            f(self.abs_sd),
            f(self.abs_median),
            f(self.rel_mean),
            f(self.rel_sd),
            f(self.rel_median),
            f(self.max_proj_cols),
            f(self.max_proj_rows),
            f(self.total_inertia),
            self.nu,
            self.n_cols_effective
        )
    }
}

impl ContributionReport {
    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            dim: self.dim,
            abs_mean: self.absolute.mean,
            abs_sd: self.absolute.sd,
            abs_median: self.absolute.median,
            rel_mean: self.relative.mean,
            rel_sd: self.relative.sd,
            rel_median: self.relative.median,
            max_proj_cols: self.max_proj_cols,
            max_proj_rows: self.max_proj_rows,
            total_inertia: self.total_inertia,
            nu: self.nu,
            n_cols_effective: self.n_cols_effective,
        }
    }
}
