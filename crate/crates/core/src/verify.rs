//! Curator-side verification against an EFECT report.
//!
//! The curator runs their own reproducibility test, compares the ECFs of a
//! random half of their sample with the reported ECFs, and asks how likely
//! that comparison error is under the distribution of their own test's
//! errors. The probability comes from a Chebyshev inequality that uses the
//! sample mean and variance of the test's error evaluations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ecf::evaluate_ecf_set;
use crate::error::{Error, Result};
use crate::metric::efect_error;
use crate::report::EfectReport;
use crate::repro::{sample_error_distribution, ErrorStats, ReproConfig};
use crate::sample::{split_indices, SimulationSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub delta_xy: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reproduced: bool,
    pub curator_stats: ErrorStats,
}

/// Bound on `Pr(|δ - mean| ≥ |delta_xy - mean|)` from `count` evaluations
/// with the given mean and sample variance:
///
/// `p = ⌊ (N+1)/N · ((N²-1)/N · var/d² + 1) ⌋ / (N+1)`, capped at 1.
pub fn chebyshev_pvalue(stats: &ErrorStats, delta_xy: f64) -> Result<f64> {
    if stats.count < 2 {
        return Err(Error::InsufficientEvaluations(stats.count));
    }
    let d = (delta_xy - stats.mean).abs();
    if d == 0.0 {
        return Ok(1.0);
    }
    let n = stats.count as f64;
    let ratio = stats.stdev * stats.stdev / (d * d);
    let bracket = ((n + 1.0) / n * ((n * n - 1.0) / n * ratio + 1.0)).floor();
    Ok((bracket / (n + 1.0)).min(1.0))
}

/// One-sided use of [`chebyshev_pvalue`]: a comparison error at or below the
/// self-test mean is no evidence against reproduction and scores 1.
pub fn reproduction_pvalue(stats: &ErrorStats, delta_xy: f64) -> Result<f64> {
    if stats.count < 2 {
        return Err(Error::InsufficientEvaluations(stats.count));
    }
    if delta_xy <= stats.mean {
        return Ok(1.0);
    }
    chebyshev_pvalue(stats, delta_xy)
}

/// Reproduced iff `p_value >= alpha`.
pub fn decide(p_value: f64, alpha: f64) -> bool {
    p_value >= alpha
}

/// Fewest self-test evaluations for which the bound can drop below `alpha`
/// with some margin; the smallest attainable value is `1 / (N + 1)`.
pub fn min_curator_evals(alpha: f64) -> usize {
    (2.0 / alpha).ceil() as usize
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_compatible(report: &EfectReport, sample: &SimulationSample) -> Result<()> {
    if sample.variable_names() != report.variable_names.as_slice() {
        return Err(Error::ReportIncompatible("variable names differ".into()));
    }
    if sample.times() != report.simulation_times.as_slice() {
        return Err(Error::ReportIncompatible("simulation times differ".into()));
    }
    Ok(())
}

/// Compares an explicit curator subsample with the report.
pub fn verify_subsample(
    report: &EfectReport,
    subsample: &SimulationSample,
    curator_stats: ErrorStats,
    alpha: f64,
) -> Result<VerificationResult> {
    check_alpha(alpha)?;
    check_compatible(report, subsample)?;
    let reported = report.ecf_set()?;
    let mine = evaluate_ecf_set(subsample, reported.grid())?;
    let delta_xy = efect_error(&mine, &reported)?.value();
    let p_value = reproduction_pvalue(&curator_stats, delta_xy)?;
    Ok(VerificationResult {
        delta_xy,
        p_value,
        alpha,
        reproduced: decide(p_value, alpha),
        curator_stats,
    })
}

/// Full curator workflow on a sample of the reported size.
///
/// `curator_sample` must already be rounded to the report's significant
/// figures. The first draw from `rng` picks the compared half, so a report
/// built from the same sample with an identically seeded generator
/// compares against exactly its own subsample. The self-test uses the
/// report's grid shape and runs at least [`min_curator_evals`] evaluations.
pub fn verify_report<R: Rng + ?Sized>(
    report: &EfectReport,
    curator_sample: &SimulationSample,
    alpha: f64,
    config: &ReproConfig,
    rng: &mut R,
) -> Result<VerificationResult> {
    check_alpha(alpha)?;
    report.validate()?;
    check_compatible(report, curator_sample)?;
    if curator_sample.run_count() != report.sample_size {
        return Err(Error::ReportIncompatible(format!(
            "sample has {} runs, report expects {}",
            curator_sample.run_count(),
            report.sample_size
        )));
    }
    let (half, _) = split_indices(curator_sample.run_count(), rng)?;
    let min_evals = config.min_evals.max(min_curator_evals(alpha));
    let self_test = ReproConfig {
        ecf: report.ecf_config(),
        min_evals,
        max_evals: config.max_evals.max(min_evals),
        ..*config
    };
    let curator_stats = sample_error_distribution(curator_sample, &self_test, rng)?;
    verify_subsample(report, &curator_sample.select(&half), curator_stats, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(mean: f64, stdev: f64, count: usize) -> ErrorStats {
        ErrorStats { mean, stdev, count, sample_size: 100 }
    }

    #[test]
    fn zero_deviation_is_one() {
        assert_eq!(chebyshev_pvalue(&stats(0.05, 0.01, 50), 0.05).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_fixture() {
        // (9999/100)(1e-4/9e-4) + 1 = 12.11; x 101/100 = 12.2311; floor 12
        let p = chebyshev_pvalue(&stats(0.05, 0.01, 100), 0.08).unwrap();
        assert_eq!(p, 12.0 / 101.0);
    }

    #[test]
    fn small_deviation_caps_at_one() {
        // 0.0568 vs 0.0535 ± 0.00659: half a standard deviation away
        let p = chebyshev_pvalue(&stats(0.0535, 0.00659, 40), 0.0568).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn needs_two_evaluations() {
        assert!(matches!(chebyshev_pvalue(&stats(0.1, 0.0, 1), 0.2), Err(Error::InsufficientEvaluations(1))));
    }

    #[test]
    fn large_deviation_bottoms_out() {
        let p = chebyshev_pvalue(&stats(0.05, 0.001, 99), 1.0).unwrap();
        assert_eq!(p, 1.0 / 100.0);
    }

    #[test]
    fn one_sided_below_mean() {
        let s = stats(0.05, 0.001, 99);
        assert_eq!(reproduction_pvalue(&s, 0.0).unwrap(), 1.0);
        assert!(chebyshev_pvalue(&s, 0.0).unwrap() < 0.05);
        assert_eq!(reproduction_pvalue(&s, 0.9).unwrap(), chebyshev_pvalue(&s, 0.9).unwrap());
    }

    #[test]
    fn decision_rule() {
        assert!(decide(1.0, 0.05));
        assert!(!decide(0.0258, 0.05));
        assert!(decide(0.05, 0.05));
    }

    #[test]
    fn curator_minimum_resolves_alpha() {
        for alpha in [0.01, 0.05, 0.1, 0.5] {
            let n = min_curator_evals(alpha) as f64;
            assert!(1.0 / (n + 1.0) < alpha);
        }
    }
}
