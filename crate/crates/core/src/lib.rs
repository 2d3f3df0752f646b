//! Correspondence analysis for very wide nonnegative matrices.
//!
//! The engine targets the regime of few rows (tens to a few hundred) crossed by
//! up to around a million columns. All heavy passes are single sequential scans
//! over columns: the row-side kernel `W` (n_rows x n_rows) is accumulated
//! column by column, eigendecomposed, and column projections are recovered by
//! the transition formula without ever materializing a per-column, per-axis
//! matrix at full width.
//!
//! Modules:
//! - [`matrix`]: `CountMatrix` storage (dense row-major or column-grouped
//!   sparse triplets), validation, text I/O and column streaming.
//! - [`frequency`]: frequencies, masses and profiles.
//! - [`decompose`]: dual-space factorization and factor projections.
//! - [`inertia`]: chi-squared distances, absolute/relative contributions and
//!   the concentration report.
//! - [`powerlaw`]: CCDF and log-log exponent fitting.
//! - [`generators`]: seeded synthetic matrices and signals.
//!
//! Parallel passes partition columns into blocks whose boundaries depend only
//! on the matrix shape, and partial results are merged in ascending block
//! order. Results are therefore bit-identical for any rayon pool size.

#![forbid(unsafe_code)]

pub mod decompose;
pub mod eigen;
mod error;
pub mod frequency;
pub mod generators;
pub mod inertia;
pub mod matrix;
pub mod powerlaw;
pub mod stats;

pub use decompose::{decompose, DecomposeOptions, FactorDecomposition};
pub use error::{Axis, Error, ErrorKind, Result};
pub use frequency::{FrequencyModel, Profile};
pub use inertia::{concentration_report, ContributionReport, ReportRecord};
pub use matrix::{CountMatrix, MatrixFormat, SignalSeries};
pub use powerlaw::{FitOptions, PowerLawFit};
