//! Independent reference: LAPACK `dgesvd` of the centered kernel
//! `S_ij = (f_ij - f_i f_j) / sqrt(f_i f_j)`.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wideca::CountMatrix;

#[link(name = "lapack")]
extern "C" {}

pub struct SvdOracle {
    /// Squared singular values, descending, above a relative null cutoff.
    pub lambdas: Vec<f64>,
    /// `u[a]` over rows, sign-normalized so the first non-negligible entry is positive.
    pub u: Vec<Vec<f64>>,
    /// `G[a][j] = σ_a v_a(j) / sqrt(f_j)` for every column.
    pub g: Vec<Vec<f64>>,
    /// `F[a][i] = σ_a u_a(i) / sqrt(f_i)`.
    pub f: Vec<Vec<f64>>,
}

struct Svd {
    s: Vec<f64>,
    /// column-major n x r
    u: Vec<f64>,
    /// column-major r x m
    vt: Vec<f64>,
    r: usize,
}

fn dgesvd(a: &[f64], n: usize, m: usize) -> Svd {
    let r = n.min(m);
    let mut a = a.to_vec();
    let mut s = vec![0.0; r];
    let mut u = vec![0.0; n * r];
    let mut vt = vec![0.0; r * m];
    let mut info = 0;
    let mut query = [0.0];
    let (ni, mi, ri) = (n as i32, m as i32, r as i32);
    unsafe {
        lapack::dgesvd(
            b'S', b'S', ni, mi, &mut a, ni, &mut s, &mut u, ni, &mut vt, ri, &mut query, -1,
            &mut info,
        );
    }
    assert_eq!(info, 0);
    let lwork = query[0] as usize;
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dgesvd(
            b'S', b'S', ni, mi, &mut a, ni, &mut s, &mut u, ni, &mut vt, ri, &mut work,
            lwork as i32, &mut info,
        );
    }
    assert_eq!(info, 0, "dgesvd failed");
    Svd { s, u, vt, r }
}

/// Assumes every row and column has mass.
pub fn svd_oracle(rows: &[Vec<f64>]) -> SvdOracle {
    let n = rows.len();
    let m = rows[0].len();
    let total: f64 = rows.iter().flatten().sum();
    let fi: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let fj: Vec<f64> = (0..m)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / total)
        .collect();
    let mut s = vec![0.0; n * m];
    for j in 0..m {
        for i in 0..n {
            s[j * n + i] = (rows[i][j] / total - fi[i] * fj[j]) / (fi[i] * fj[j]).sqrt();
        }
    }
    let svd = dgesvd(&s, n, m);
    let smax = svd.s[0];
    let mut out = SvdOracle {
        lambdas: vec![],
        u: vec![],
        g: vec![],
        f: vec![],
    };
    // LAPACK returns singular values in descending order
    for k in 0..svd.r {
        let sigma = svd.s[k];
        if sigma <= 1e-7 * smax || sigma < 1e-12 {
            break;
        }
        let mut u: Vec<f64> = (0..n).map(|i| svd.u[k * n + i]).collect();
        let mut v: Vec<f64> = (0..m).map(|j| svd.vt[j * svd.r + k]).collect();
        let first = *u.iter().find(|x| x.abs() > 1e-12).unwrap();
        if first < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
            v.iter_mut().for_each(|x| *x = -*x);
        }
        out.lambdas.push(sigma * sigma);
        out.f.push((0..n).map(|i| sigma * u[i] / fi[i].sqrt()).collect());
        out.g.push((0..m).map(|j| sigma * v[j] / fj[j].sqrt()).collect());
        out.u.push(u);
    }
    out
}

/// Random positive matrix; every row and column has mass.
pub fn random_dense(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0.05..5.0)).collect())
        .collect()
}

/// Random boolean matrix with density `p`, patched so no row or column is empty.
pub fn random_boolean(n: usize, m: usize, p: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    for i in 0..n {
        if rows[i].iter().all(|&v| v == 0.0) {
            rows[i][rng.random_range(0..m)] = 1.0;
        }
    }
    for j in 0..m {
        if rows.iter().all(|r| r[j] == 0.0) {
            let i = rng.random_range(0..n);
            rows[i][j] = 1.0;
        }
    }
    rows
}

pub fn to_matrix(rows: &[Vec<f64>], sparse: bool) -> CountMatrix {
    let m = CountMatrix::from_dense(rows.len(), rows[0].len(), rows.concat()).unwrap();
    if sparse {
        m.to_sparse()
    } else {
        m
    }
}
