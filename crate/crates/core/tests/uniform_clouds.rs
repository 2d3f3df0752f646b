//! Seeded checks against the published uniform-cloud summaries.

use wideca::decompose::{decompose, DecomposeOptions};
use wideca::generators::gen_uniform;
use wideca::inertia::concentration_report;
use wideca::stats::mean;
use wideca::{ContributionReport, FrequencyModel};

fn report(cols: usize, seed: u64) -> ContributionReport {
    let m = gen_uniform(86, cols, seed).unwrap();
    let fm = FrequencyModel::new(&m).unwrap();
    let fd = decompose(&fm, DecomposeOptions::default()).unwrap();
    concentration_report(&fm, &fd)
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

#[test]
fn d100_absolute_mean_and_sd() {
    let reports: Vec<ContributionReport> = (0..10).map(|s| report(100, s)).collect();
    for r in &reports {
        assert_eq!(r.nu, 86);
        assert!((r.relative.mean - 0.86).abs() < 1e-12);
    }
    let abs_mean = mean(&reports.iter().map(|r| r.absolute.mean).collect::<Vec<_>>());
    let abs_sd = mean(&reports.iter().map(|r| r.absolute.sd).collect::<Vec<_>>());
    assert!(within(abs_mean, 0.01322144, 0.10), "{abs_mean}");
    assert!(within(abs_sd, 0.0005623589, 0.10), "{abs_sd}");
}

#[test]
fn d1000_relative_median() {
    let medians: Vec<f64> = (0..10).map(|s| report(1000, s).relative.median).collect();
    for (s, m) in medians.iter().enumerate() {
        assert!(within(*m, 0.08547353, 0.05), "seed {s}: {m}");
    }
    let r = report(1000, 0);
    assert!((r.relative.mean - 0.086).abs() < 1e-12);
    assert!(within(r.absolute.mean, 0.001331763, 0.10));
}

#[test]
fn d10000_max_projection_scale() {
    let maxes: Vec<f64> = (0..10).map(|s| report(10_000, s).max_proj_cols).collect();
    for m in &maxes {
        assert!(within(*m, 0.2799913, 0.5), "{m}");
    }
    assert!(mean(&maxes) > 0.0);
}
