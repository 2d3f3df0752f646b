//! Frequencies `f_ij = k_ij / k`, masses and profiles.

use crate::error::{Axis, Error, Result};
use crate::matrix::CountMatrix;

/// Frequency view of a [`CountMatrix`]. The frequency matrix itself stays
/// implicit; only the marginals are stored.
#[derive(Debug, Clone)]
pub struct FrequencyModel<'a> {
    matrix: &'a CountMatrix,
    grand_total: f64,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
    zero_rows: Vec<usize>,
    zero_cols: Vec<usize>,
}

impl<'a> FrequencyModel<'a> {
    pub fn new(matrix: &'a CountMatrix) -> Result<Self> {
        let col_sums = matrix.column_sums();
        let row_sums = matrix.row_sums();
        let grand_total = matrix.grand_total();
        if grand_total <= 0.0 {
            return Err(Error::ZeroTotal);
        }
        let row_masses = row_sums.iter().map(|r| r / grand_total).collect();
        let col_masses = col_sums.iter().map(|c| c / grand_total).collect();
        let zeros = |v: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|(_, &x)| x == 0.0)
                .map(|(i, _)| i)
                .collect::<Vec<_>>()
        };
        Ok(FrequencyModel {
            matrix,
            grand_total,
            zero_rows: zeros(&row_sums),
            zero_cols: zeros(&col_sums),
            row_sums,
            col_sums,
            row_masses,
            col_masses,
        })
    }

    pub fn matrix(&self) -> &'a CountMatrix {
        self.matrix
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Grand total `k`, in the units of the input data.
    pub fn grand_total(&self) -> f64 {
        self.grand_total
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// `f_I`, sums to one.
    pub fn row_masses(&self) -> &[f64] {
        &self.row_masses
    }

    /// `f_J`, sums to one.
    pub fn col_masses(&self) -> &[f64] {
        &self.col_masses
    }

    pub fn zero_rows(&self) -> &[usize] {
        &self.zero_rows
    }

    /// Columns without mass. They have no profile and are left out of
    /// projections and contribution summaries.
    pub fn zero_cols(&self) -> &[usize] {
        &self.zero_cols
    }

    pub fn n_cols_effective(&self) -> usize {
        self.n_cols() - self.zero_cols.len()
    }

    /// `f_ij`.
    pub fn f(&self, row: usize, col: usize) -> f64 {
        self.matrix.get(row, col) / self.grand_total
    }

    pub fn profile(&self, axis: Axis, index: usize) -> Result<Profile> {
        profile(self, axis, index)
    }
}

pub fn build_frequency_model(m: &CountMatrix) -> Result<FrequencyModel<'_>> {
    FrequencyModel::new(m)
}

/// A conditional distribution: row `i` over columns (`f_ij / f_i`) or
/// column `j` over rows (`f_ij / f_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub axis: Axis,
    pub index: usize,
    pub coords: Vec<f64>,
}

pub fn profile(fm: &FrequencyModel<'_>, axis: Axis, index: usize) -> Result<Profile> {
    let (sums, len) = match axis {
        Axis::Row => (fm.row_sums(), fm.n_rows()),
        Axis::Column => (fm.col_sums(), fm.n_cols()),
    };
    if index >= len {
        return Err(Error::OutOfRange { axis, index, len });
    }
    let mass = sums[index];
    if mass == 0.0 {
        return Err(Error::ZeroMass { axis, index });
    }
    let coords = match axis {
        Axis::Row => fm.matrix().row_dense(index),
        Axis::Column => {
            let mut dense = vec![0.0; fm.n_rows()];
            let (rows, values) = fm.matrix().column_entries(index);
            for (r, v) in rows.into_iter().zip(values) {
                dense[r as usize] = v;
            }
            dense
        }
    }
    .into_iter()
    .map(|k| k / mass)
    .collect();
    Ok(Profile {
        axis,
        index,
        coords,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> CountMatrix {
        let n_cols = rows[0].len();
        CountMatrix::from_dense(rows.len(), n_cols, rows.concat()).unwrap()
    }

    #[test]
    fn uniform_two_by_two() {
        let m = dense(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let fm = build_frequency_model(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(fm.f(i, j), 0.25);
            }
        }
        assert_eq!(fm.row_masses(), &[0.5, 0.5]);
        assert_eq!(fm.col_masses(), &[0.5, 0.5]);
        for axis in [Axis::Row, Axis::Column] {
            for idx in 0..2 {
                assert_eq!(profile(&fm, axis, idx).unwrap().coords, vec![0.5, 0.5]);
            }
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let m = dense(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let fm = build_frequency_model(&m).unwrap();
        assert_eq!(fm.row_masses(), &[0.5, 0.5]);
        assert_eq!(fm.col_masses(), &[0.5, 0.5]);
        assert_eq!(fm.f(0, 0), 0.5);
        assert_eq!(fm.f(1, 1), 0.5);
    }

    #[test]
    fn k0_masses_match_independent_sums() {
        let rows: [[f64; 4]; 3] = [[2.0, 0.0, 1.0, 1.0], [1.0, 1.0, 0.0, 2.0], [0.0, 2.0, 2.0, 0.0]];
        let m = dense(&[&rows[0], &rows[1], &rows[2]]);
        let fm = build_frequency_model(&m).unwrap();
        // oracle: hand summation over the literal array
        let total: f64 = rows.iter().flatten().sum();
        assert_eq!(total, 12.0);
        for (i, row) in rows.iter().enumerate() {
            let expect = row.iter().sum::<f64>() / total;
            assert!((fm.row_masses()[i] - expect).abs() < 1e-15);
        }
        for j in 0..4 {
            let expect = rows.iter().map(|r| r[j]).sum::<f64>() / total;
            assert!((fm.col_masses()[j] - expect).abs() < 1e-15);
        }
        let p = profile(&fm, Axis::Column, 0).unwrap();
        assert_eq!(p.coords, vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
    }

    #[test]
    fn zero_column_has_no_profile() {
        let m = dense(&[&[1.0, 0.0, 2.0], &[3.0, 0.0, 1.0]]);
        let fm = build_frequency_model(&m).unwrap();
        assert_eq!(fm.zero_cols(), &[1]);
        assert_eq!(fm.n_cols_effective(), 2);
        assert!(matches!(
            profile(&fm, Axis::Column, 1),
            Err(Error::ZeroMass { axis: Axis::Column, index: 1 })
        ));
        assert!(matches!(
            profile(&fm, Axis::Column, 9),
            Err(Error::OutOfRange { .. })
        ));
    }
}
