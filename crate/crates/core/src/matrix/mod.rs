//! Nonnegative data matrices in dense and sparse storage.
//!
//! Dense data is kept row-major (the natural text layout). Sparse data is kept
//! as triplets grouped by column and sorted by row within each column, i.e. a
//! compressed-column layout, because every analysis pass walks columns.

mod io;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

pub use io::{format_value, load_matrix, load_values, save_matrix, save_values};

/// On-disk matrix formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    /// Comma-separated reals, one matrix row per line, no header.
    DenseCsv,
    /// `%<n_rows> <n_cols> <nnz>` header, then `<row> <col> <value>` lines,
    /// 0-based, sorted by column then row.
    Triplet,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" | "csv" => Ok(MatrixFormat::DenseCsv),
            "triplet" => Ok(MatrixFormat::Triplet),
            other => Err(Error::InvalidArgument(format!("unknown matrix format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumns {
    col_ptr: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    /// Row-major, `n_rows * n_cols` values.
    Dense(Vec<f64>),
    Sparse(SparseColumns),
}

/// A validated nonnegative matrix with a positive grand total.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    n_rows: usize,
    n_cols: usize,
    storage: Storage,
}

/// Entries of one column: parallel slices of row indices and values, rows ascending.
#[derive(Debug, Clone, Copy)]
pub struct Column<'a> {
    pub rows: &'a [u32],
    pub values: &'a [f64],
}

impl<'a> Column<'a> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.rows
            .iter()
            .zip(self.values)
            .map(|(&r, &v)| (r as usize, v))
    }
}

fn check_value(row: usize, col: usize, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { row, col });
    }
    if value < 0.0 {
        return Err(Error::Negative { row, col, value });
    }
    Ok(())
}

fn check_shape(n_rows: usize, n_cols: usize) -> Result<()> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::Empty);
    }
    if n_rows > u32::MAX as usize {
        return Err(Error::InvalidMatrix(format!("{n_rows} rows exceed the u32 index range")));
    }
    Ok(())
}

/// Fixed partition of `0..n_cols` used by every parallel pass. Block
/// boundaries depend only on `n_cols`.
pub fn column_blocks(n_cols: usize) -> Vec<Range<usize>> {
    const MAX_BLOCKS: usize = 64;
    const MIN_WIDTH: usize = 256;
    let width = n_cols.div_ceil(MAX_BLOCKS).max(MIN_WIDTH);
    (0..n_cols)
        .step_by(width)
        .map(|lo| lo..(lo + width).min(n_cols))
        .collect()
}

const DENSE_GATHER: usize = 64;

impl CountMatrix {
    pub fn from_dense(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(n_rows, n_cols)?;
        if data.len() != n_rows * n_cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} values for {n_rows}x{n_cols}, got {}",
                n_rows * n_cols,
                data.len()
            )));
        }
        for (idx, &v) in data.iter().enumerate() {
            check_value(idx / n_cols, idx % n_cols, v)?;
        }
        let m = CountMatrix {
            n_rows,
            n_cols,
            storage: Storage::Dense(data),
        };
        m.check_total()?;
        Ok(m)
    }

    /// Builds a sparse matrix from `(row, col, value)` triplets in any order.
    /// Duplicate positions are rejected.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        check_shape(n_rows, n_cols)?;
        triplets.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut rows = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in &triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
            if prev == Some((r, c)) {
                return Err(Error::InvalidMatrix(format!("duplicate entry ({r}, {c})")));
            }
            check_value(r, c, v)?;
            prev = Some((r, c));
            col_ptr[c + 1] += 1;
            rows.push(r as u32);
            values.push(v);
        }
        for c in 0..n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self::from_compressed(n_rows, n_cols, col_ptr, rows, values)
    }

    /// Builds a sparse matrix from compressed-column parts. Rows must be
    /// strictly ascending within each column.
    pub fn from_compressed(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        rows: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_shape(n_rows, n_cols)?;
        if col_ptr.len() != n_cols + 1
            || col_ptr[0] != 0
            || col_ptr[n_cols] != rows.len()
            || rows.len() != values.len()
        {
            return Err(Error::InvalidMatrix("inconsistent compressed column arrays".into()));
        }
        for c in 0..n_cols {
            let (lo, hi) = (col_ptr[c], col_ptr[c + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!("column pointer decreases at {c}")));
            }
            for k in lo..hi {
                let r = rows[k] as usize;
                if r >= n_rows {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({r}, {c}) outside {n_rows}x{n_cols}"
                    )));
                }
                if k > lo && rows[k - 1] >= rows[k] {
                    return Err(Error::InvalidMatrix(format!(
                        "rows not strictly ascending in column {c}"
                    )));
                }
                check_value(r, c, values[k])?;
            }
        }
        let m = CountMatrix {
            n_rows,
            n_cols,
            storage: Storage::Sparse(SparseColumns {
                col_ptr,
                rows,
                values,
            }),
        };
        m.check_total()?;
        Ok(m)
    }

    fn check_total(&self) -> Result<()> {
        if self.grand_total() > 0.0 {
            Ok(())
        } else {
            Err(Error::ZeroTotal)
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Number of stored entries (all cells for dense storage).
    pub fn stored_len(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Sparse(s) => s.values.len(),
        }
    }

    /// Number of strictly positive entries.
    pub fn count_positive(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|&&v| v > 0.0).count(),
            Storage::Sparse(s) => s.values.iter().filter(|&&v| v > 0.0).count(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.n_rows && col < self.n_cols, "index out of range");
        match &self.storage {
            Storage::Dense(d) => d[row * self.n_cols + col],
            Storage::Sparse(s) => {
                let (lo, hi) = (s.col_ptr[col], s.col_ptr[col + 1]);
                match s.rows[lo..hi].binary_search(&(row as u32)) {
                    Ok(k) => s.values[lo + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// `Σ_i k_ij` for every column, accumulated in ascending row order so
    /// dense and sparse storage of the same data agree exactly.
    pub fn column_sums(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => {
                let mut sums = vec![0.0; self.n_cols];
                for row in d.chunks_exact(self.n_cols) {
                    for (s, &v) in sums.iter_mut().zip(row) {
                        *s += v;
                    }
                }
                sums
            }
            Storage::Sparse(s) => (0..self.n_cols)
                .map(|c| {
                    let mut acc = 0.0;
                    for &v in &s.values[s.col_ptr[c]..s.col_ptr[c + 1]] {
                        acc += v;
                    }
                    acc
                })
                .collect(),
        }
    }

    /// `Σ_j k_ij` for every row, accumulated in ascending column order.
    pub fn row_sums(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d
                .chunks_exact(self.n_cols)
                .map(|row| {
                    let mut acc = 0.0;
                    for &v in row {
                        acc += v;
                    }
                    acc
                })
                .collect(),
            Storage::Sparse(s) => {
                let mut sums = vec![0.0; self.n_rows];
                for (&r, &v) in s.rows.iter().zip(&s.values) {
                    sums[r as usize] += v;
                }
                sums
            }
        }
    }

    /// Grand total `k`, a pairwise sum of the column sums.
    pub fn grand_total(&self) -> f64 {
        pairwise_sum(&self.column_sums())
    }

    /// See [`column_blocks`].
    pub fn column_blocks(&self) -> Vec<Range<usize>> {
        column_blocks(self.n_cols)
    }

    /// Visits every column once, in ascending order. Columns without entries
    /// are visited with an empty entry list. Dense columns carry every row.
    pub fn stream_columns<F>(&self, visitor: F)
    where
        F: FnMut(usize, Column<'_>),
    {
        self.stream_column_range(0..self.n_cols, visitor)
    }

    /// [`stream_columns`](Self::stream_columns) restricted to a column range.
    pub fn stream_column_range<F>(&self, range: Range<usize>, mut visitor: F)
    where
        F: FnMut(usize, Column<'_>),
    {
        assert!(range.end <= self.n_cols, "column range out of bounds");
        match &self.storage {
            Storage::Sparse(s) => {
                for c in range {
                    let (lo, hi) = (s.col_ptr[c], s.col_ptr[c + 1]);
                    visitor(
                        c,
                        Column {
                            rows: &s.rows[lo..hi],
                            values: &s.values[lo..hi],
                        },
                    );
                }
            }
            Storage::Dense(d) => {
                let n = self.n_rows;
                let all_rows: Vec<u32> = (0..n as u32).collect();
                let mut buf = vec![0.0; n * DENSE_GATHER];
                let mut lo = range.start;
                while lo < range.end {
                    let hi = (lo + DENSE_GATHER).min(range.end);
                    let width = hi - lo;
                    // transpose the block so each column is contiguous
                    for i in 0..n {
                        let src = &d[i * self.n_cols + lo..i * self.n_cols + hi];
                        for (c, &v) in src.iter().enumerate() {
                            buf[c * n + i] = v;
                        }
                    }
                    for c in 0..width {
                        visitor(
                            lo + c,
                            Column {
                                rows: &all_rows,
                                values: &buf[c * n..(c + 1) * n],
                            },
                        );
                    }
                    lo = hi;
                }
            }
        }
    }

    /// Copies one column into `(rows, values)` form.
    pub fn column_entries(&self, col: usize) -> (Vec<u32>, Vec<f64>) {
        let mut out = (Vec::new(), Vec::new());
        self.stream_column_range(col..col + 1, |_, c| {
            out = (c.rows.to_vec(), c.values.to_vec());
        });
        out
    }

    /// Copies one row into a dense vector of length `n_cols`.
    pub fn row_dense(&self, row: usize) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d[row * self.n_cols..(row + 1) * self.n_cols].to_vec(),
            Storage::Sparse(_) => (0..self.n_cols).map(|c| self.get(row, c)).collect(),
        }
    }

    /// Nonzero entries as `(row, col, value)`, sorted by column then row.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        self.stream_columns(|c, col| {
            out.extend(col.iter().filter(|&(_, v)| v != 0.0).map(|(r, v)| (r, c, v)));
        });
        out
    }

    pub fn to_dense(&self) -> CountMatrix {
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Sparse(_) => {
                let mut data = vec![0.0; self.n_rows * self.n_cols];
                self.stream_columns(|c, col| {
                    for (r, v) in col.iter() {
                        data[r * self.n_cols + c] = v;
                    }
                });
                CountMatrix {
                    n_rows: self.n_rows,
                    n_cols: self.n_cols,
                    storage: Storage::Dense(data),
                }
            }
        }
    }

    /// Sparse copy holding only the nonzero entries.
    pub fn to_sparse(&self) -> CountMatrix {
        let mut col_ptr = Vec::with_capacity(self.n_cols + 1);
        let mut rows = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        self.stream_columns(|_, col| {
            for (r, v) in col.iter() {
                if v != 0.0 {
                    rows.push(r as u32);
                    values.push(v);
                }
            }
            col_ptr.push(rows.len());
        });
        CountMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            storage: Storage::Sparse(SparseColumns {
                col_ptr,
                rows,
                values,
            }),
        }
    }
}

/// An ordered, gap-free sequence of signal samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    values: Vec<f64>,
}

impl SignalSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty signal".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("missing or non-finite sample at {i}")));
        }
        Ok(SignalSeries { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
