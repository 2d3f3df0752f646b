//! Seeded synthetic data for the three evaluation settings: dense uniform
//! clouds, sliding-window embeddings of a signal, and sparse boolean matrices
//! whose column sums follow a given (empirical or power-law) marginal law.
//!
//! # Random number contract
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A generator
//! seeded with `(seed, stream)` is `ChaCha8Rng::seed_from_u64(seed)` switched
//! to stream `stream` with `set_stream`. Column generators use stream = column
//! index, so every column is a pure function of `(seed, column)` and the
//! output does not depend on how columns are scheduled across threads. The
//! random-walk signal uses stream 0.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{column_blocks, CountMatrix, SignalSeries};

/// Dense generators refuse to allocate more cells than this (2.4 GB of f64).
pub const DEFAULT_CELL_BUDGET: u128 = 300_000_000;

/// Density exponent of the parametric stand-in for the 425-row presence data.
/// With [`STANDIN_K_MIN`] this gives about 7% density and a fitted CCDF slope
/// near 1.5 at 1052 columns.
pub const STANDIN_EXPONENT: f64 = 2.35;
pub const STANDIN_K_MIN: usize = 11;

const MERGE_GROUP: usize = 8;

/// Deterministic generator for `(seed, stream)`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_dims(n_rows: usize, n_cols: usize) -> Result<()> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::InvalidArgument("rows and columns must be >= 1".into()));
    }
    Ok(())
}

/// i.i.d. uniform `[0, 1)` dense matrix.
pub fn gen_uniform(n_rows: usize, n_cols: usize, seed: u64) -> Result<CountMatrix> {
    gen_uniform_with_budget(n_rows, n_cols, seed, DEFAULT_CELL_BUDGET)
}

pub fn gen_uniform_with_budget(
    n_rows: usize,
    n_cols: usize,
    seed: u64,
    budget: u128,
) -> Result<CountMatrix> {
    check_dims(n_rows, n_cols)?;
    let cells = n_rows as u128 * n_cols as u128;
    if cells > budget {
        return Err(Error::Budget { cells, budget });
    }
    let mut data = vec![0.0; n_rows * n_cols];
    let blocks = column_blocks(n_cols);
    for group in blocks.chunks(MERGE_GROUP) {
        // column-major buffers, one per block
        let bufs: Vec<Vec<f64>> = group
            .par_iter()
            .map(|r| {
                let mut buf = Vec::with_capacity(r.len() * n_rows);
                for j in r.clone() {
                    let mut rng = substream(seed, j as u64);
                    buf.extend((0..n_rows).map(|_| rng.random::<f64>()));
                }
                buf
            })
            .collect();
        for (r, buf) in group.iter().zip(bufs) {
            for i in 0..n_rows {
                let dst = &mut data[i * n_cols + r.start..i * n_cols + r.end];
                for (c, d) in dst.iter_mut().enumerate() {
                    *d = buf[c * n_rows + i];
                }
            }
        }
    }
    CountMatrix::from_dense(n_rows, n_cols, data)
}

/// Row `r` is `sig[r * stride .. r * stride + length]`.
pub fn embed_signal(
    sig: &SignalSeries,
    n_windows: usize,
    stride: usize,
    length: usize,
) -> Result<CountMatrix> {
    if n_windows == 0 || length == 0 {
        return Err(Error::InvalidArgument("windows and length must be >= 1".into()));
    }
    let needed = (n_windows - 1) * stride + length;
    if needed > sig.len() {
        return Err(Error::SignalTooShort {
            needed,
            len: sig.len(),
        });
    }
    let values = sig.values();
    if let Some(index) = values[..needed].iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeSignal {
            index,
            value: values[index],
        });
    }
    let mut data = Vec::with_capacity(n_windows * length);
    for r in 0..n_windows {
        data.extend_from_slice(&values[r * stride..r * stride + length]);
    }
    CountMatrix::from_dense(n_windows, length, data)
}

/// Quantized random walk: with probability `p_repeat` the previous value is
/// repeated, otherwise it moves by ±0.5 with equal probability.
pub fn gen_randomwalk_signal(n: usize, start: f64, seed: u64, p_repeat: f64) -> Result<SignalSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument("signal length must be >= 1".into()));
    }
    if !(start > 0.0) || !start.is_finite() || (2.0 * start).fract() != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "start {start} must be a positive multiple of 0.5"
        )));
    }
    if !(0.0..1.0).contains(&p_repeat) {
        return Err(Error::InvalidArgument(format!("p_repeat {p_repeat} must be in [0, 1)")));
    }
    let mut rng = substream(seed, 0);
    let mut values = Vec::with_capacity(n);
    let mut v = start;
    values.push(v);
    for step in 1..n {
        if rng.random::<f64>() >= p_repeat {
            v += if rng.random::<bool>() { 0.5 } else { -0.5 };
            if v <= 0.0 {
                return Err(Error::WalkCrossedZero { step, value: v });
            }
        }
        values.push(v);
    }
    SignalSeries::new(values)
}

/// Discrete power law `P(k) ∝ k^-exponent` on `k_min..=k_max`, sampled by
/// inverse CDF over a precomputed cumulative table.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPowerLaw {
    exponent: f64,
    k_min: usize,
    cdf: Vec<f64>,
}

impl TruncatedPowerLaw {
    pub fn new(exponent: f64, k_min: usize, k_max: usize) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent {exponent} must be > 0")));
        }
        if k_min == 0 || k_max < k_min {
            return Err(Error::InvalidArgument(format!(
                "support [{k_min}, {k_max}] must satisfy 1 <= k_min <= k_max"
            )));
        }
        let weights: Vec<f64> = (k_min..=k_max).map(|k| (k as f64).powf(-exponent)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(TruncatedPowerLaw {
            exponent,
            k_min,
            cdf,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn k_max(&self) -> usize {
        self.k_min + self.cdf.len() - 1
    }

    /// Maps `u ∈ [0, 1)` to the smallest `k` with `CDF(k) > u`.
    pub fn quantile(&self, u: f64) -> usize {
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.k_min + idx.min(self.cdf.len() - 1)
    }

    pub fn pmf(&self, k: usize) -> f64 {
        if k < self.k_min || k > self.k_max() {
            return 0.0;
        }
        let i = k - self.k_min;
        if i == 0 {
            self.cdf[0]
        } else {
            self.cdf[i] - self.cdf[i - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        (self.k_min..=self.k_max()).map(|k| k as f64 * self.pmf(k)).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile(rng.random::<f64>())
    }
}

/// Description of where column sums come from, as stored in provenance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MarginalSpec {
    /// Resample uniformly, with replacement, from observed column sums.
    Empirical { values: Vec<usize> },
    /// Truncated discrete power law with density exponent `exponent` on
    /// `[k_min, n_rows]`.
    Parametric { exponent: f64, k_min: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSource {
    Empirical(Vec<usize>),
    Parametric(TruncatedPowerLaw),
    /// Draws of `inner` multiplied by `factor`, rounded, and kept at least 1.
    Scaled { inner: Box<MarginalSource>, factor: f64 },
}

impl MarginalSource {
    pub fn from_spec(spec: &MarginalSpec, n_rows: usize) -> Result<Self> {
        match spec {
            MarginalSpec::Empirical { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidArgument("empty marginal list".into()));
                }
                if let Some(v) = values.iter().find(|&&v| v > n_rows) {
                    return Err(Error::InvalidArgument(format!(
                        "marginal sum {v} exceeds {n_rows} rows"
                    )));
                }
                Ok(MarginalSource::Empirical(values.clone()))
            }
            MarginalSpec::Parametric { exponent, k_min } => Ok(MarginalSource::Parametric(
                TruncatedPowerLaw::new(*exponent, *k_min, n_rows)?,
            )),
        }
    }

    /// Rescale every draw by `factor`. A factor of 1 is plain resampling.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "marginal scale {factor} must be in (0, 1]"
            )));
        }
        if factor == 1.0 {
            return Ok(self);
        }
        Ok(MarginalSource::Scaled {
            inner: Box::new(self),
            factor,
        })
    }

    fn max_value(&self) -> usize {
        match self {
            MarginalSource::Empirical(v) => v.iter().copied().max().unwrap_or(0),
            MarginalSource::Parametric(law) => law.k_max(),
            MarginalSource::Scaled { inner, factor } => scale_sum(inner.max_value(), *factor),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            MarginalSource::Empirical(v) => v[rng.random_range(0..v.len())],
            MarginalSource::Parametric(law) => law.sample(rng),
            MarginalSource::Scaled { inner, factor } => scale_sum(inner.draw(rng), *factor),
        }
    }
}

fn scale_sum(k: usize, factor: f64) -> usize {
    if k == 0 {
        return 0;
    }
    ((k as f64 * factor).round() as usize).max(1)
}

/// The column sums [`gen_powerlaw_boolean`] would draw, without building the matrix.
pub fn gen_powerlaw_marginals(n_cols: usize, source: &MarginalSource, seed: u64) -> Vec<usize> {
    column_blocks(n_cols)
        .into_par_iter()
        .map(|r| {
            r.map(|j| source.draw(&mut substream(seed, j as u64)))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Boolean matrix whose column `j` has exactly `k_j` ones on distinct rows
/// chosen uniformly, with `k_j` drawn from `source`.
pub fn gen_powerlaw_boolean(
    n_rows: usize,
    n_cols: usize,
    source: &MarginalSource,
    seed: u64,
) -> Result<CountMatrix> {
    check_dims(n_rows, n_cols)?;
    if source.max_value() > n_rows {
        return Err(Error::InvalidArgument(format!(
            "marginal sums up to {} exceed {n_rows} rows",
            source.max_value()
        )));
    }
    let parts: Vec<(Vec<usize>, Vec<u32>)> = column_blocks(n_cols)
        .into_par_iter()
        .map(|r| {
            let mut counts = Vec::with_capacity(r.len());
            let mut rows = Vec::new();
            for j in r {
                let mut rng = substream(seed, j as u64);
                let k = source.draw(&mut rng);
                let mut picked: Vec<u32> = index::sample(&mut rng, n_rows, k)
                    .into_iter()
                    .map(|i| i as u32)
                    .collect();
                picked.sort_unstable();
                counts.push(k);
                rows.extend(picked);
            }
            (counts, rows)
        })
        .collect();
    let mut col_ptr = Vec::with_capacity(n_cols + 1);
    col_ptr.push(0);
    let mut rows = Vec::new();
    for (counts, r) in parts {
        for k in counts {
            col_ptr.push(col_ptr.last().unwrap() + k);
        }
        rows.extend(r);
    }
    let values = vec![1.0; rows.len()];
    CountMatrix::from_compressed(n_rows, n_cols, col_ptr, rows, values)
}

/// Serializable description of a generator run; the same spec always yields
/// the same bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Uniform {
        n_rows: usize,
        n_cols: usize,
        seed: u64,
    },
    PowerlawBoolean {
        n_rows: usize,
        n_cols: usize,
        seed: u64,
        marginals: MarginalSpec,
    },
    RandomwalkSignal {
        len: usize,
        start: f64,
        p_repeat: f64,
        seed: u64,
    },
    Embedding {
        n_windows: usize,
        stride: usize,
        length: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_source_shrinks_sums() {
        let src = MarginalSource::Empirical(vec![10, 1]).scaled(0.25).unwrap();
        let mut rng = substream(3, 0);
        for _ in 0..50 {
            let k = src.draw(&mut rng);
            assert!(k == 3 || k == 1, "{k}");
        }
        assert!(MarginalSource::Empirical(vec![1]).scaled(0.0).is_err());
        assert!(MarginalSource::Empirical(vec![1]).scaled(1.5).is_err());
        assert_eq!(
            MarginalSource::Empirical(vec![4]).scaled(1.0).unwrap(),
            MarginalSource::Empirical(vec![4])
        );
    }

    #[test]
    fn uniform_values_in_unit_interval() {
        let m = gen_uniform(86, 100, 1).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (86, 100));
        for i in 0..86 {
            for v in m.row_dense(i) {
                assert!((0.0..1.0).contains(&v));
            }
        }
        let one = gen_uniform(1, 1, 5).unwrap();
        assert!((0.0..1.0).contains(&one.get(0, 0)));
    }

    #[test]
    fn uniform_is_reproducible_and_column_addressed() {
        let a = gen_uniform(7, 600, 42).unwrap();
        assert_eq!(a, gen_uniform(7, 600, 42).unwrap());
        assert_ne!(a, gen_uniform(7, 600, 43).unwrap());
        // column j depends only on (seed, j)
        let b = gen_uniform(7, 10, 42).unwrap();
        for i in 0..7 {
            for j in 0..10 {
                assert_eq!(a.get(i, j), b.get(i, j));
            }
        }
    }

    #[test]
    fn uniform_budget_is_enforced() {
        assert!(matches!(
            gen_uniform_with_budget(10, 10, 0, 99),
            Err(Error::Budget { cells: 100, budget: 99 })
        ));
    }

    #[test]
    fn embedding_by_hand() {
        let sig = SignalSeries::new((1..=20).map(f64::from).collect()).unwrap();
        let m = embed_signal(&sig, 3, 5, 4).unwrap();
        assert_eq!(m.row_dense(0), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.row_dense(1), vec![6.0, 7.0, 8.0, 9.0]);
        assert_eq!(m.row_dense(2), vec![11.0, 12.0, 13.0, 14.0]);
    }

    #[test]
    fn embedding_bounds_and_sign() {
        let sig = SignalSeries::new(vec![1.0; 95_011]).unwrap();
        let m = embed_signal(&sig, 86, 1000, 100).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (86, 100));
        assert!(embed_signal(&sig, 86, 1000, 10_000).is_ok());
        assert!(matches!(
            embed_signal(&sig, 86, 1000, 10_012),
            Err(Error::SignalTooShort { needed: 95_012, len: 95_011 })
        ));
        let neg = SignalSeries::new(vec![1.0, -1.0, 2.0]).unwrap();
        assert!(matches!(embed_signal(&neg, 1, 1, 3), Err(Error::NegativeSignal { index: 1, .. })));
    }

    #[test]
    fn walk_steps_are_half_ticks() {
        let s = gen_randomwalk_signal(5, 100.0, 3, 0.0).unwrap();
        assert_eq!(s.len(), 5);
        for w in s.values().windows(2) {
            assert!((w[1] - w[0]).abs() == 0.5);
        }
        let s = gen_randomwalk_signal(10_000, 6800.0, 3, 0.9).unwrap();
        assert!(s.values().iter().all(|v| v > &0.0 && (2.0 * v).fract() == 0.0));
    }

    #[test]
    fn walk_rejects_bad_parameters() {
        assert!(gen_randomwalk_signal(10, 100.25, 0, 0.5).is_err());
        assert!(gen_randomwalk_signal(10, 100.0, 0, 1.0).is_err());
        assert!(gen_randomwalk_signal(0, 100.0, 0, 0.5).is_err());
        // a walk from 0.5 without repeats cannot survive 10^4 steps
        assert!(matches!(
            gen_randomwalk_signal(10_000, 0.5, 0, 0.0),
            Err(Error::WalkCrossedZero { .. })
        ));
    }

    #[test]
    fn forced_empirical_sums() {
        let src = MarginalSource::from_spec(&MarginalSpec::Empirical { values: vec![2, 2, 2] }, 4)
            .unwrap();
        let m = gen_powerlaw_boolean(4, 3, &src, 9).unwrap();
        assert_eq!(m.column_sums(), vec![2.0, 2.0, 2.0]);
        assert!(MarginalSource::from_spec(&MarginalSpec::Empirical { values: vec![5] }, 4).is_err());
    }

    #[test]
    fn truncated_law_table() {
        let law = TruncatedPowerLaw::new(2.0, 1, 3).unwrap();
        // weights 1, 1/4, 1/9 over total 49/36
        let total = 1.0 + 0.25 + 1.0 / 9.0;
        assert!((law.pmf(1) - 1.0 / total).abs() < 1e-15);
        assert!((law.pmf(3) - (1.0 / 9.0) / total).abs() < 1e-15);
        assert_eq!(law.quantile(0.0), 1);
        assert_eq!(law.quantile(0.999_999), 3);
        assert_eq!(law.k_max(), 3);
        assert!(TruncatedPowerLaw::new(2.0, 0, 3).is_err());
        assert!(TruncatedPowerLaw::new(-1.0, 1, 3).is_err());
    }

    #[test]
    fn marginals_match_matrix_column_sums() {
        let src = MarginalSource::from_spec(
            &MarginalSpec::Parametric {
                exponent: 2.3,
                k_min: 11,
            },
            425,
        )
        .unwrap();
        let m = gen_powerlaw_boolean(425, 700, &src, 17).unwrap();
        let drawn = gen_powerlaw_marginals(700, &src, 17);
        let sums: Vec<usize> = m.column_sums().iter().map(|&s| s as usize).collect();
        assert_eq!(sums, drawn);
    }
}
