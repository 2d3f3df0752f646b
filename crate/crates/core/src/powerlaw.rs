//! Empirical CCDF and power-law exponent estimation.
//!
//! The estimator is ordinary least squares on `(ln x, ln P(X > x))` over the
//! distinct observed values inside a fit window. The reported exponent is the
//! positive CCDF magnitude `α` in `P(X > x) ~ c x^-α`; the density exponent
//! is `α + 1`.
//!
//! For integer-valued data the discrete CCDF is better aligned with the
//! continuous law at `x + 1/2` than at `x`; [`FitOptions::offset`] regresses
//! on `ln(x + offset)` for that case (see [`FitOptions::discrete`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Smallest value in the fit window, at least 1.
    pub x_min: f64,
    /// Largest value in the fit window; `None` uses the 99th percentile.
    pub x_max: Option<f64>,
    /// Shift applied to `x` before taking logs.
    pub offset: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            x_min: 1.0,
            x_max: None,
            offset: 0.0,
        }
    }
}

impl FitOptions {
    /// Defaults with the half-unit continuity shift for integer counts.
    pub fn discrete() -> Self {
        FitOptions {
            offset: 0.5,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// CCDF exponent magnitude, `P(X > x) ~ c x^-alpha`.
    pub alpha: f64,
    pub c: f64,
    /// Smallest x actually used.
    pub x_min: f64,
    /// Largest x actually used.
    pub x_max: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl PowerLawFit {
    /// The exponent with the sign a log-log slope carries.
    pub fn signed_exponent(&self) -> f64 {
        -self.alpha
    }
}

/// `(x, fraction of values > x)` for every distinct observed `x`, ascending.
pub fn ccdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("value {v} is not a finite nonnegative real")));
    }
    if !values.iter().any(|&v| v > 0.0) {
        return Err(Error::AllZero);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut end = i;
        while end < sorted.len() && sorted[end] == x {
            end += 1;
        }
        out.push((x, (sorted.len() - end) as f64 / n));
        i = end;
    }
    Ok(out)
}

/// OLS fit of `ln ccdf` against `ln(x + offset)` over `x_min <= x <= x_max`
/// and `ccdf > 0`.
pub fn fit_ccdf(points: &[(f64, f64)], x_min: f64, x_max: f64, offset: f64) -> Result<PowerLawFit> {
    if !(x_min >= 1.0) {
        return Err(Error::InvalidArgument(format!("x_min {x_min} must be >= 1")));
    }
    if !(x_max >= x_min) {
        return Err(Error::InvalidArgument(format!("x_max {x_max} is below x_min {x_min}")));
    }
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, p)| x >= x_min && x <= x_max && p > 0.0)
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientPoints(used.len()));
    }
    let xs: Vec<f64> = used.iter().map(|&(x, _)| (x + offset).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&(_, p)| p.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        alpha: -slope,
        c: intercept.exp(),
        x_min: used[0].0,
        x_max: used[used.len() - 1].0,
        r_squared,
        n_points: used.len(),
    })
}

/// CCDF exponent of `values` under `opts`.
pub fn fit_exponent(values: &[f64], opts: &FitOptions) -> Result<PowerLawFit> {
    let points = ccdf(values)?;
    let x_max = match opts.x_max {
        Some(x) => x,
        None => quantile(values, 0.99),
    };
    fit_ccdf(&points, opts.x_min, x_max, opts.offset)
}

/// The `(ln(x + offset), ln ccdf)` pairs a fit would use, for plotting.
pub fn loglog_points(points: &[(f64, f64)], offset: f64) -> Vec<(f64, f64)> {
    points
        .iter()
        .filter(|&&(x, p)| x + offset > 0.0 && p > 0.0)
        .map(|&(x, p)| ((x + offset).ln(), p.ln()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccdf_by_hand() {
        assert_eq!(
            ccdf(&[1.0, 1.0, 2.0, 4.0]).unwrap(),
            vec![(1.0, 0.5), (2.0, 0.25), (4.0, 0.0)]
        );
        assert_eq!(ccdf(&[3.0, 3.0, 3.0]).unwrap(), vec![(3.0, 0.0)]);
        assert!(matches!(ccdf(&[0.0, 0.0]), Err(Error::AllZero)));
        assert!(ccdf(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn exact_power_law_points() {
        let pts: Vec<(f64, f64)> = (1..=100).map(|x| (x as f64, (x as f64).powf(-1.5))).collect();
        let fit = fit_ccdf(&pts, 1.0, 100.0, 0.0).unwrap();
        assert!((fit.alpha - 1.5).abs() < 1e-9);
        assert!((fit.c - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 100);
    }

    #[test]
    fn constant_values_have_too_few_points() {
        assert!(matches!(
            fit_exponent(&[3.0, 3.0, 3.0], &FitOptions::default()),
            Err(Error::InsufficientPoints(0))
        ));
    }

    #[test]
    fn window_excludes_fan_out() {
        let pts: Vec<(f64, f64)> = (1..=50)
            .map(|x| {
                let x = x as f64;
                // pure power law up to 20, then a steep drop
                let p = if x <= 20.0 { x.powf(-1.2) } else { x.powf(-1.2) * (-(x - 20.0)).exp() };
                (x, p)
            })
            .collect();
        let fit = fit_ccdf(&pts, 1.0, 20.0, 0.0).unwrap();
        assert!((fit.alpha - 1.2).abs() < 1e-9);
        assert_eq!(fit.x_max, 20.0);
    }

    #[test]
    fn rejects_bad_window() {
        let pts = vec![(1.0, 0.5), (2.0, 0.25), (3.0, 0.1)];
        assert!(fit_ccdf(&pts, 0.5, 3.0, 0.0).is_err());
        assert!(fit_ccdf(&pts, 2.0, 1.0, 0.0).is_err());
    }
}
