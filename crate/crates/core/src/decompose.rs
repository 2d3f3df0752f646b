//! Dual-space correspondence analysis.
//!
//! The row-side kernel
//!
//! ```text
//! W_ik = Σ_j f_ij f_kj / (sqrt(f_i f_k) f_j)
//! ```
//!
//! is accumulated in one pass over the columns and eigendecomposed. Its top
//! eigenpair is always `(1, sqrt(f_I))` (the trivial axis); the remaining
//! eigenvalues are the squared singular values of the centered kernel
//! `S_ij = (f_ij - f_i f_j) / sqrt(f_i f_j)`. The trivial direction is split
//! off exactly with a Householder reflection before the eigensolve, then
//! re-attached (or not) according to [`DecomposeOptions::include_trivial`].
//!
//! Dense input is centered column by column before accumulation, which
//! gives `S Sᵀ` (trivial eigenvalue 0) instead of `W`. Near-constant columns
//! leave non-trivial eigenvalues far below the rounding level of `W`, and
//! only the centered sum resolves them. Sparse input keeps `W`, whose
//! accumulation touches stored entries only.
//!
//! Row projections are `F_a(i) = sqrt(λ_a) u_a(i) / sqrt(f_i)` and column
//! projections follow from the transition formula
//! `G_a(j) = (1/sqrt(λ_a)) Σ_i F_a(i) f_ij / f_j = Σ_i u_a(i) f_ij / (sqrt(f_i) f_j)`.

use rayon::prelude::*;

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::frequency::FrequencyModel;
use crate::matrix::Column;

/// Largest row count accepted by the dual route (the kernel is n x n).
pub const DUAL_ROW_LIMIT: usize = 2000;

/// Eigenvalues below this are treated as a numerically indefinite kernel.
const INDEFINITE_TOL: f64 = -1e-8;

/// Coordinates smaller than this do not decide an eigenvector's sign.
const SIGN_EPS: f64 = 1e-12;

/// Column blocks reduced per merge step; bounds the number of live partial kernels.
const MERGE_GROUP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecomposeOptions {
    /// Keep the trivial axis (eigenvalue 1, every projection 1).
    pub include_trivial: bool,
    /// Non-trivial axes with `λ < tol * λ_max` are dropped.
    pub tol: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            include_trivial: true,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorDecomposition {
    include_trivial: bool,
    n_rows: usize,
    /// Rows with nonzero mass, ascending; the row-side vectors are indexed by position here.
    active_rows: Vec<usize>,
    eigenvalues: Vec<f64>,
    row_basis: Vec<Vec<f64>>,
    row_projections: Vec<Vec<f64>>,
    /// `n_rows x n_nontrivial`, row-major: `u_a(i) sqrt(k / k_i)`, zero for massless rows.
    transition: Vec<f64>,
}

impl FactorDecomposition {
    /// Number of retained axes ν, the trivial axis included when kept.
    pub fn nu(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn include_trivial(&self) -> bool {
        self.include_trivial
    }

    /// λ for every retained axis, descending; `λ_0 = 1` is the trivial axis when kept.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn offset(&self) -> usize {
        usize::from(self.include_trivial)
    }

    pub fn n_nontrivial(&self) -> usize {
        self.nu() - self.offset()
    }

    pub fn nontrivial_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[self.offset()..]
    }

    /// Total inertia `Σ_a λ_a` over the retained axes.
    pub fn total_inertia(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn active_rows(&self) -> &[usize] {
        &self.active_rows
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Unit vector `u_a` over the active rows.
    pub fn row_basis(&self, axis: usize) -> &[f64] {
        &self.row_basis[axis]
    }

    /// `F_a(i)` for every active row.
    pub fn row_projections(&self, axis: usize) -> &[f64] {
        &self.row_projections[axis]
    }

    /// `F_a(i)`, or `None` for a row without mass.
    pub fn row_projection(&self, row: usize, axis: usize) -> Option<f64> {
        self.active_rows
            .binary_search(&row)
            .ok()
            .map(|p| self.row_projections[axis][p])
    }

    /// Largest `|F_a(i)|` over rows and non-trivial axes.
    pub fn max_abs_row_projection(&self) -> f64 {
        self.row_projections[self.offset()..]
            .iter()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Computes `G_a(j)` for one column into `out` (length ν).
    fn project_column(&self, col: Column<'_>, col_sum: f64, out: &mut [f64]) {
        let q = self.n_nontrivial();
        let off = self.offset();
        if off == 1 {
            out[0] = 1.0;
        }
        let g = &mut out[off..];
        g.fill(0.0);
        for (i, v) in col.iter() {
            if v == 0.0 {
                continue;
            }
            let weights = &self.transition[i * q..(i + 1) * q];
            for (ga, &b) in g.iter_mut().zip(weights) {
                *ga += v * b;
            }
        }
        let inv = 1.0 / col_sum;
        for ga in g.iter_mut() {
            *ga *= inv;
        }
    }
}

/// Accumulates the upper triangle of `A_ik = Σ_j k_ij k_kj / c_j` over a
/// column range, or of `Σ_j e_ij e_kj / c_j` with `e_ij = k_ij - k_i c_j / k`
/// when `centered`.
fn accumulate_kernel(
    fm: &FrequencyModel<'_>,
    range: std::ops::Range<usize>,
    n: usize,
    centered: bool,
) -> Vec<f64> {
    let mut acc = vec![0.0; n * n];
    let col_sums = fm.col_sums();
    let row_sums = fm.row_sums();
    let k = fm.grand_total();
    let mut e = vec![0.0; if centered { n } else { 0 }];
    fm.matrix().stream_column_range(range, |j, col| {
        let c = col_sums[j];
        if c == 0.0 {
            return;
        }
        let inv = 1.0 / c;
        if centered {
            debug_assert_eq!(col.len(), n);
            let scale = c / k;
            for ((ep, &v), &r) in e.iter_mut().zip(col.values).zip(row_sums) {
                *ep = v - r * scale;
            }
            for (p, &ep) in e.iter().enumerate() {
                let w = ep * inv;
                let row = &mut acc[p * n + p..(p + 1) * n];
                for (a, &eq) in row.iter_mut().zip(&e[p..]) {
                    *a += w * eq;
                }
            }
        } else if col.len() == n {
            // full column: rows are exactly 0..n
            let vals = col.values;
            for (p, &vp) in vals.iter().enumerate() {
                if vp == 0.0 {
                    continue;
                }
                let w = vp * inv;
                let row = &mut acc[p * n + p..(p + 1) * n];
                for (a, &vq) in row.iter_mut().zip(&vals[p..]) {
                    *a += w * vq;
                }
            }
        } else {
            for p in 0..col.len() {
                let ip = col.rows[p] as usize;
                let w = col.values[p] * inv;
                let row = &mut acc[ip * n..(ip + 1) * n];
                for q in p..col.len() {
                    row[col.rows[q] as usize] += w * col.values[q];
                }
            }
        }
    });
    acc
}

fn build_kernel(fm: &FrequencyModel<'_>, centered: bool) -> Vec<f64> {
    let n = fm.n_rows();
    let blocks = fm.matrix().column_blocks();
    let mut total = vec![0.0; n * n];
    for group in blocks.chunks(MERGE_GROUP) {
        let partials: Vec<Vec<f64>> = group
            .par_iter()
            .map(|r| accumulate_kernel(fm, r.clone(), n, centered))
            .collect();
        for p in partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
    }
    total
}

/// Flips `u` so that its first non-negligible coordinate is positive.
fn fix_sign(u: &mut [f64]) {
    if let Some(&first) = u.iter().find(|x| x.abs() > SIGN_EPS) {
        if first < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn decompose(fm: &FrequencyModel<'_>, opts: DecomposeOptions) -> Result<FactorDecomposition> {
    let n_rows = fm.n_rows();
    if n_rows > DUAL_ROW_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "{n_rows} rows exceed the dual-route limit of {DUAL_ROW_LIMIT}"
        )));
    }
    if !(opts.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be >= 0", opts.tol)));
    }
    let k = fm.grand_total();
    let row_sums = fm.row_sums();
    let active_rows: Vec<usize> = (0..n_rows).filter(|&i| row_sums[i] > 0.0).collect();
    let n = active_rows.len();

    let centered = !fm.matrix().is_sparse();
    let acc = build_kernel(fm, centered);
    let mut w = vec![0.0; n * n];
    for (p, &i) in active_rows.iter().enumerate() {
        for (q, &kk) in active_rows.iter().enumerate().skip(p) {
            let val = acc[i * n_rows + kk] / (row_sums[i] * row_sums[kk]).sqrt();
            w[p * n + q] = val;
            w[q * n + p] = val;
        }
    }

    // trivial direction sqrt(f_I), normalized
    let mut s: Vec<f64> = active_rows.iter().map(|&i| (row_sums[i] / k).sqrt()).collect();
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    s.iter_mut().for_each(|x| *x /= norm);

    let mut nontrivial: Vec<(f64, Vec<f64>)> = Vec::new();
    if n >= 2 {
        // H = I - beta v v^T with v = s + e_1 maps s to -e_1; its last n-1
        // columns span the complement of s.
        let mut v = s.clone();
        v[0] += 1.0;
        let beta = 2.0 / v.iter().map(|x| x * x).sum::<f64>();
        let p: Vec<f64> = (0..n)
            .map(|i| beta * (0..n).map(|c| w[i * n + c] * v[c]).sum::<f64>())
            .collect();
        let kappa = 0.5 * beta * v.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
        let qv: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        let m = n - 1;
        let mut block = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let (i, c) = (a + 1, b + 1);
                block[a * m + b] = w[i * n + c] - v[i] * qv[c] - qv[i] * v[c];
            }
        }
        let eig = symmetric_eigen(&block, m)?;
        if let Some(&lowest) = eig.values.last() {
            if lowest < INDEFINITE_TOL {
                return Err(Error::Indefinite(lowest));
            }
        }
        // Eigenvalues at the rounding level of the kernel are null. `W` has
        // norm 1; rounding in the centered sum scales with sqrt(λ_max).
        let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        let noise = if centered { lambda_max.sqrt() + lambda_max } else { 1.0 };
        let floor = 8.0 * n as f64 * f64::EPSILON * noise;
        let rank_cap = n.min(fm.n_cols_effective()).saturating_sub(1);
        for (lam, y) in eig.values.iter().zip(&eig.vectors) {
            if nontrivial.len() == rank_cap || !(*lam > floor) || *lam < opts.tol * lambda_max {
                break;
            }
            let vy: f64 = (0..m).map(|a| v[a + 1] * y[a]).sum();
            let mut u: Vec<f64> = (0..n)
                .map(|i| {
                    let padded = if i == 0 { 0.0 } else { y[i - 1] };
                    padded - beta * v[i] * vy
                })
                .collect();
            fix_sign(&mut u);
            nontrivial.push((*lam, u));
        }
    }

    let q = nontrivial.len();
    let mut transition = vec![0.0; n_rows * q];
    for (p, &i) in active_rows.iter().enumerate() {
        let scale = (k / row_sums[i]).sqrt();
        for (a, (_, u)) in nontrivial.iter().enumerate() {
            transition[i * q + a] = u[p] * scale;
        }
    }

    let mut eigenvalues = Vec::with_capacity(q + 1);
    let mut row_basis = Vec::with_capacity(q + 1);
    let mut row_projections = Vec::with_capacity(q + 1);
    if opts.include_trivial {
        eigenvalues.push(1.0);
        row_basis.push(s.clone());
        row_projections.push(vec![1.0; n]);
    }
    for (lam, u) in nontrivial {
        let root = lam.sqrt();
        let f: Vec<f64> = active_rows
            .iter()
            .zip(&u)
            .map(|(&i, ui)| root * ui / (row_sums[i] / k).sqrt())
            .collect();
        eigenvalues.push(lam);
        row_basis.push(u);
        row_projections.push(f);
    }

    Ok(FactorDecomposition {
        include_trivial: opts.include_trivial,
        n_rows,
        active_rows,
        eigenvalues,
        row_basis,
        row_projections,
        transition,
    })
}

/// Streams `G_a(j)` for every column with mass, in parallel over the fixed
/// column blocks. `fold` receives `(column, projections)`; one accumulator
/// per block is returned in ascending block order.
pub fn fold_column_projections<A, I, F>(
    fm: &FrequencyModel<'_>,
    fd: &FactorDecomposition,
    init: I,
    fold: F,
) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, usize, &[f64]) + Sync,
{
    let col_sums = fm.col_sums();
    fm.matrix()
        .column_blocks()
        .into_par_iter()
        .map(|range| {
            let mut acc = init();
            let mut g = vec![0.0; fd.nu()];
            fm.matrix().stream_column_range(range, |j, col| {
                if col_sums[j] == 0.0 {
                    return;
                }
                fd.project_column(col, col_sums[j], &mut g);
                fold(&mut acc, j, &g);
            });
            acc
        })
        .collect()
}

/// Column projections materialized for every column with mass.
///
/// Holds `n_cols x ν` values; meant for moderate widths. Wide analyses go
/// through [`fold_column_projections`] instead.
#[derive(Debug, Clone)]
pub struct ColumnProjections {
    pub nu: usize,
    /// Columns with mass, ascending.
    pub columns: Vec<usize>,
    /// Columns without mass (no profile, no projection).
    pub skipped: Vec<usize>,
    values: Vec<f64>,
}

impl ColumnProjections {
    /// Projections of the `k`-th listed column.
    pub fn get(&self, k: usize) -> &[f64] {
        &self.values[k * self.nu..(k + 1) * self.nu]
    }

    /// Projections of column `col`, if it has mass.
    pub fn of_column(&self, col: usize) -> Option<&[f64]> {
        self.columns.binary_search(&col).ok().map(|k| self.get(k))
    }
}

pub fn column_projections(fm: &FrequencyModel<'_>, fd: &FactorDecomposition) -> ColumnProjections {
    let parts = fold_column_projections(
        fm,
        fd,
        || (Vec::new(), Vec::new()),
        |acc: &mut (Vec<usize>, Vec<f64>), j, g| {
            acc.0.push(j);
            acc.1.extend_from_slice(g);
        },
    );
    let mut columns = Vec::new();
    let mut values = Vec::new();
    for (c, v) in parts {
        columns.extend(c);
        values.extend(v);
    }
    ColumnProjections {
        nu: fd.nu(),
        columns,
        skipped: fm.zero_cols().to_vec(),
        values,
    }
}

/// `G_a(j)` for a single column.
pub fn project_single_column(
    fm: &FrequencyModel<'_>,
    fd: &FactorDecomposition,
    col: usize,
) -> Result<Vec<f64>> {
    let n_cols = fm.n_cols();
    if col >= n_cols {
        return Err(Error::OutOfRange {
            axis: crate::Axis::Column,
            index: col,
            len: n_cols,
        });
    }
    let c = fm.col_sums()[col];
    if c == 0.0 {
        return Err(Error::ZeroMass {
            axis: crate::Axis::Column,
            index: col,
        });
    }
    let (rows, values) = fm.matrix().column_entries(col);
    let mut g = vec![0.0; fd.nu()];
    fd.project_column(
        Column {
            rows: &rows,
            values: &values,
        },
        c,
        &mut g,
    );
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CountMatrix;

    fn dense(rows: &[&[f64]]) -> CountMatrix {
        CountMatrix::from_dense(rows.len(), rows[0].len(), rows.concat()).unwrap()
    }

    #[test]
    fn uniform_matrix_has_only_trivial_axis() {
        let m = dense(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let fm = FrequencyModel::new(&m).unwrap();
        let fd = decompose(&fm, DecomposeOptions::default()).unwrap();
        assert_eq!(fd.nu(), 1);
        assert_eq!(fd.eigenvalues(), &[1.0]);
        assert_eq!(fd.row_projections(0), &[1.0, 1.0]);
        let without = decompose(
            &fm,
            DecomposeOptions {
                include_trivial: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(without.nu(), 0);
        assert_eq!(without.total_inertia(), 0.0);
    }

    #[test]
    fn diagonal_matrix_is_perfect_association() {
        // oracle: S = [[1/2, -1/2], [-1/2, 1/2]] has the single singular value 1
        // with left vector (1, -1)/sqrt(2); F_1 = u / sqrt(1/2) = (1, -1).
        let m = dense(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let fm = FrequencyModel::new(&m).unwrap();
        let fd = decompose(&fm, DecomposeOptions::default()).unwrap();
        assert_eq!(fd.nu(), 2);
        assert!((fd.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let f1 = fd.row_projections(1);
        assert!((f1[0] - 1.0).abs() < 1e-14);
        assert!((f1[1] + 1.0).abs() < 1e-14);
        let cp = column_projections(&fm, &fd);
        assert!((cp.get(0)[1] - 1.0).abs() < 1e-14);
        assert!((cp.get(1)[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rows_and_columns_are_excluded() {
        let m = dense(&[
            &[1.0, 0.0, 3.0, 2.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[2.0, 0.0, 1.0, 5.0],
            &[4.0, 0.0, 1.0, 1.0],
        ]);
        let fm = FrequencyModel::new(&m).unwrap();
        let fd = decompose(&fm, DecomposeOptions::default()).unwrap();
        assert_eq!(fd.active_rows(), &[0, 2, 3]);
        assert_eq!(fd.row_projection(1, 0), None);
        // 3 active rows x 3 columns with mass: rank 2 centered
        assert_eq!(fd.nu(), 3);
        let cp = column_projections(&fm, &fd);
        assert_eq!(cp.columns, vec![0, 2, 3]);
        assert_eq!(cp.skipped, vec![1]);
        assert!(project_single_column(&fm, &fd, 1).is_err());
    }

    #[test]
    fn rank_never_exceeds_shape() {
        // 5 rows, 2 columns: at most one non-trivial axis
        let m = dense(&[&[1.0, 2.0], &[3.0, 1.0], &[2.0, 2.0], &[0.5, 4.0], &[1.0, 1.0]]);
        let fm = FrequencyModel::new(&m).unwrap();
        let fd = decompose(&fm, DecomposeOptions::default()).unwrap();
        assert_eq!(fd.nu(), 2);
    }

    #[test]
    fn sign_convention_is_first_coordinate_positive() {
        let m = dense(&[&[5.0, 1.0, 2.0], &[1.0, 4.0, 2.0], &[2.0, 2.0, 6.0]]);
        let fm = FrequencyModel::new(&m).unwrap();
        let fd = decompose(&fm, DecomposeOptions::default()).unwrap();
        for a in 0..fd.nu() {
            let u = fd.row_basis(a);
            let first = u.iter().find(|x| x.abs() > SIGN_EPS).unwrap();
            assert!(*first > 0.0);
        }
    }
}
