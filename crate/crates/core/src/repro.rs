//! Modeler-side reproducibility testing.
//!
//! A sample of `2N` runs is tested by repeatedly splitting it into two
//! random `N`-run halves and measuring the EFECT error between the halves.
//! Evaluations continue until the running mean settles; the resulting
//! statistics are then checked against the convergence point
//! (by default `mean + 3·stdev < 0.075`). [`grow_to_convergence`] adds runs
//! until that criterion holds.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecf::{accumulate_phasors, EcfConfig, EcfGrid};
use crate::error::{Error, Result};
use crate::metric::max_distance;
use crate::rng::stream_rng;
use crate::sample::{split_indices, SimulationSample};

/// Statistics of the EFECT error evaluations from one reproducibility test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stdev: f64,
    /// Number of EFECT error evaluations.
    pub count: usize,
    /// Run count of the tested sample.
    pub sample_size: usize,
}

impl ErrorStats {
    pub fn from_evaluations(evaluations: &[f64], sample_size: usize) -> Self {
        let n = evaluations.len();
        let mean = evaluations.iter().sum::<f64>() / n as f64;
        let stdev = if n < 2 {
            0.0
        } else {
            let ss: f64 = evaluations.iter().map(|d| (d - mean) * (d - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        Self { mean, stdev, count: n, sample_size }
    }

    /// The statistic compared against the convergence threshold.
    pub fn upper_statistic(&self, multiplier: f64) -> f64 {
        self.mean + multiplier * self.stdev
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproConfig {
    /// Stop once the relative change of the running mean drops below this.
    pub rel_tol: f64,
    pub min_evals: usize,
    pub max_evals: usize,
    pub target_threshold: f64,
    pub target_multiplier: f64,
    pub ecf: EcfConfig,
}

impl Default for ReproConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            min_evals: 10,
            max_evals: 10_000,
            target_threshold: 0.075,
            target_multiplier: 3.0,
            ecf: EcfConfig::default(),
        }
    }
}

impl ReproConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("rel_tol must be in (0, 1), got {}", self.rel_tol)));
        }
        if self.min_evals < 1 || self.min_evals > self.max_evals {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= min_evals <= max_evals, got {} and {}",
                self.min_evals, self.max_evals
            )));
        }
        if !(self.target_threshold > 0.0) || !(self.target_multiplier >= 0.0) {
            return Err(Error::InvalidArgument("target threshold and multiplier must be positive".into()));
        }
        self.ecf.validate()
    }
}

/// Precomputed per-entry data for evaluating many splits of one sample.
struct SplitEvaluator {
    entries: Vec<Entry>,
    num_points: usize,
    run_count: usize,
}

struct Entry {
    /// Column values in ascending order.
    sorted: Vec<f64>,
    /// Run index of each sorted value.
    runs: Vec<u32>,
    step: f64,
}

impl SplitEvaluator {
    fn new(sample: &SimulationSample, grid: &EcfGrid) -> Self {
        let nt = sample.num_times();
        let entries = (0..grid.num_entries())
            .filter_map(|idx| {
                let col = sample.column(idx / nt, idx % nt);
                let mut order: Vec<u32> = (0..col.len() as u32).collect();
                order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                let sorted: Vec<f64> = order.iter().map(|&r| col[r as usize]).collect();
                // both halves of a constant entry are identical, so it adds nothing
                if sorted.first() == sorted.last() {
                    return None;
                }
                Some(Entry { sorted, runs: order, step: grid.step(idx) })
            })
            .collect();
        Self { entries, num_points: grid.num_points(), run_count: sample.run_count() }
    }

    /// EFECT error between the halves marked by `in_left`.
    fn evaluate(&self, in_left: &[bool]) -> f64 {
        let half = (self.run_count / 2) as f64;
        let zero = Complex64::new(0.0, 0.0);
        let mut left = vec![zero; self.num_points];
        let mut right = vec![zero; self.num_points];
        let mut worst = 0.0f64;
        for e in &self.entries {
            left.fill(zero);
            right.fill(zero);
            let pick = |want: bool| {
                e.sorted
                    .iter()
                    .zip(&e.runs)
                    .filter(move |(_, &r)| in_left[r as usize] == want)
                    .map(|(&x, _)| x)
            };
            accumulate_phasors(pick(true), e.step, &mut left);
            accumulate_phasors(pick(false), e.step, &mut right);
            left.iter_mut().for_each(|z| *z /= half);
            right.iter_mut().for_each(|z| *z /= half);
            worst = worst.max(max_distance(&left, &right));
        }
        worst
    }

    fn evaluate_split(&self, master: u64, index: usize) -> f64 {
        let mut rng = stream_rng(master, index as u64);
        let (left, _) = split_indices(self.run_count, &mut rng).expect("validated even run count");
        let mut in_left = vec![false; self.run_count];
        for r in left {
            in_left[r] = true;
        }
        self.evaluate(&in_left)
    }
}

fn check_testable(sample: &SimulationSample) -> Result<()> {
    let n = sample.run_count();
    if n % 2 != 0 {
        return Err(Error::OddSampleSize(n));
    }
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "reproducibility test needs at least 4 runs, got {n}"
        )));
    }
    Ok(())
}

/// EFECT error evaluations of the reproducibility test, in evaluation order.
///
/// Every split is evaluated on one grid built from the full sample. Split
/// `i` draws from stream `i` of a master seed taken from `rng`, so the
/// evaluations do not depend on how batches are scheduled across threads.
pub fn sample_error_evaluations<R: Rng + ?Sized>(
    sample: &SimulationSample,
    config: &ReproConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    config.validate()?;
    check_testable(sample)?;
    let grid = EcfGrid::for_sample(sample, config.ecf)?;
    let evaluator = SplitEvaluator::new(sample, &grid);
    let master: u64 = rng.random();
    let batch = rayon::current_num_threads().max(1);

    let mut evals: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut prev_mean = f64::NAN;
    loop {
        let want = if evals.len() < config.min_evals { config.min_evals - evals.len() } else { batch };
        let start = evals.len();
        let end = (start + want).min(config.max_evals);
        let fresh: Vec<f64> = (start..end)
            .into_par_iter()
            .map(|i| evaluator.evaluate_split(master, i))
            .collect();
        // stopping rule applied in evaluation-index order
        for d in fresh {
            evals.push(d);
            sum += d;
            let k = evals.len();
            let mean = sum / k as f64;
            if k >= config.min_evals && k >= 2 {
                let settled = if mean == 0.0 {
                    evals[k - config.min_evals..].iter().all(|&e| e == 0.0)
                } else {
                    ((mean - prev_mean) / mean).abs() < config.rel_tol
                };
                if settled {
                    return Ok(evals);
                }
            }
            prev_mean = mean;
        }
        if evals.len() >= config.max_evals {
            return Err(Error::NotConverged {
                partial: ErrorStats::from_evaluations(&evals, sample.run_count()),
            });
        }
    }
}

/// Runs the reproducibility test and summarises the evaluations.
pub fn sample_error_distribution<R: Rng + ?Sized>(
    sample: &SimulationSample,
    config: &ReproConfig,
    rng: &mut R,
) -> Result<ErrorStats> {
    let evals = sample_error_evaluations(sample, config, rng)?;
    Ok(ErrorStats::from_evaluations(&evals, sample.run_count()))
}

/// `mean + multiplier · stdev < threshold`.
pub fn meets_convergence_point(stats: &ErrorStats, config: &ReproConfig) -> bool {
    stats.upper_statistic(config.target_multiplier) < config.target_threshold
}

/// `statistic ≈ coefficient · size^exponent`, fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, size: f64) -> f64 {
        self.coefficient * size.powf(self.exponent)
    }
}

/// Ordinary least squares of `ln statistic` on `ln size`.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(n, s)| *n == 0 || !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("power-law fit needs positive values, got {p:?}")));
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().any(|q| q.0 == p.0) {
            return Err(Error::InvalidArgument(format!("duplicate size {} in power-law fit", p.0)));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + exponent * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerLawFit { coefficient: intercept.exp(), exponent, r_squared })
}

/// Smallest even sample size whose fitted statistic is at most `target`.
pub fn estimate_required_size(fit: &PowerLawFit, target: f64) -> Result<usize> {
    if fit.exponent >= 0.0 {
        return Err(Error::CannotExtrapolate(fit.exponent));
    }
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target must be positive, got {target}")));
    }
    let exact = (target / fit.coefficient).powf(1.0 / fit.exponent);
    if !exact.is_finite() || exact > u64::MAX as f64 / 4.0 {
        return Err(Error::InvalidArgument(format!("required size {exact} is out of range")));
    }
    let mut n = exact.ceil().max(1.0) as usize;
    // undo a round-up caused only by floating-point noise in `exact`
    if n > 1 && fit.predict((n - 1) as f64) <= target {
        n -= 1;
    }
    Ok(even_up(n.max(2)))
}

fn even_up(n: usize) -> usize {
    n + n % 2
}

/// Schedule for growing a sample toward the convergence point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConfig {
    pub initial_size: usize,
    /// Largest sample size that may be generated.
    pub max_size: usize,
    /// Size multiplier after a failed extrapolated test.
    pub growth_factor: f64,
    /// History points collected by doubling before the power-law jump.
    pub bootstrap_points: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { initial_size: 100, max_size: 100_000, growth_factor: 1.25, bootstrap_points: 3 }
    }
}

/// One tested sample size and its statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub size: usize,
    #[serde(flatten)]
    pub stats: ErrorStats,
    /// Whether the running mean settled before `max_evals`.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct GrowthOutcome {
    pub sample: SimulationSample,
    pub stats: ErrorStats,
    pub history: Vec<HistoryPoint>,
}

/// Grows a sample until it meets the convergence point.
///
/// `generate(first, count)` must return runs `first..first + count`; the
/// sample only ever grows, so earlier runs are reused. Sizes double until
/// `bootstrap_points` sizes have been tested, then jump to the size a
/// power-law fit of `mean + multiplier·stdev` predicts, then grow by
/// `growth_factor` until accepted or the budget runs out.
pub fn grow_to_convergence<G, R>(
    mut generate: G,
    config: &ReproConfig,
    growth: &GrowthConfig,
    rng: &mut R,
) -> Result<GrowthOutcome>
where
    G: FnMut(usize, usize) -> Result<SimulationSample>,
    R: Rng + ?Sized,
{
    config.validate()?;
    if !(growth.growth_factor > 1.0) || growth.bootstrap_points < 3 {
        return Err(Error::InvalidArgument("growth factor must exceed 1 and bootstrap points be >= 3".into()));
    }
    let mut size = even_up(growth.initial_size.max(4));
    let mut history = Vec::new();
    if size > growth.max_size {
        return Err(Error::BudgetExceeded { budget: growth.max_size, history });
    }
    let mut sample = generate(0, size)?;
    let mut jumped = false;
    loop {
        let (stats, converged) = match sample_error_distribution(&sample, config, rng) {
            Ok(s) => (s, true),
            Err(Error::NotConverged { partial }) => (partial, false),
            Err(e) => return Err(e),
        };
        history.push(HistoryPoint { size, stats, converged });
        if converged && meets_convergence_point(&stats, config) {
            return Ok(GrowthOutcome { sample, stats, history });
        }

        let grown = even_up((size as f64 * growth.growth_factor).ceil() as usize);
        let mut next = if history.len() < growth.bootstrap_points {
            size * 2
        } else if !jumped {
            jumped = true;
            let points: Vec<(usize, f64)> = history
                .iter()
                .map(|h| (h.size, h.stats.upper_statistic(config.target_multiplier)))
                .collect();
            fit_power_law(&points)
                .and_then(|fit| estimate_required_size(&fit, config.target_threshold))
                .map(|n| n.max(grown))
                .unwrap_or(size * 2)
        } else {
            grown
        };
        if next > growth.max_size {
            let cap = growth.max_size - growth.max_size % 2;
            if size >= cap {
                return Err(Error::BudgetExceeded { budget: growth.max_size, history });
            }
            next = cap;
        }
        let extra = generate(size, next - size)?;
        sample = sample.merge(&extra)?;
        size = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecf::evaluate_ecf_set;
    use crate::metric::efect_error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(values: &[f64]) -> SimulationSample {
        let runs: Vec<_> = values.iter().map(|&x| vec![vec![x]]).collect();
        SimulationSample::from_runs(vec!["x".into()], vec![0.0], &runs).unwrap()
    }

    #[test]
    fn identical_runs_give_zero_stats() {
        let s = single(&[2.5; 8]);
        let cfg = ReproConfig::default();
        let stats = sample_error_distribution(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(stats, ErrorStats { mean: 0.0, stdev: 0.0, count: cfg.min_evals, sample_size: 8 });
    }

    #[test]
    fn four_run_enumeration_oracle() {
        // Runs {0,0,1,1}: of the 3 partitions, one separates the values
        // and two give identical halves.
        let s = single(&[0.0, 0.0, 1.0, 1.0]);
        let cfg = ReproConfig { rel_tol: 1e-6, max_evals: 2_000_000, ..Default::default() };
        let grid = EcfGrid::for_sample(&s, cfg.ecf).unwrap();
        let partitions = [([0, 1], [2, 3]), ([0, 2], [1, 3]), ([0, 3], [1, 2])];
        let population: Vec<f64> = partitions
            .iter()
            .map(|(l, r)| {
                let a = evaluate_ecf_set(&s.select(l), &grid).unwrap();
                let b = evaluate_ecf_set(&s.select(r), &grid).unwrap();
                efect_error(&a, &b).unwrap().value()
            })
            .collect();
        let exact_mean = population.iter().sum::<f64>() / 3.0;
        let stats = sample_error_distribution(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert!((stats.mean - exact_mean).abs() < 0.01, "{} vs {exact_mean}", stats.mean);
    }

    #[test]
    fn split_kernel_matches_ecf_sets() {
        let xs: Vec<f64> = (0..20).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let s = single(&xs);
        let grid = EcfGrid::for_sample(&s, EcfConfig::default()).unwrap();
        let ev = SplitEvaluator::new(&s, &grid);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let (l, r) = split_indices(20, &mut rng).unwrap();
            let mut mask = vec![false; 20];
            l.iter().for_each(|&i| mask[i] = true);
            let a = evaluate_ecf_set(&s.select(&l), &grid).unwrap();
            let b = evaluate_ecf_set(&s.select(&r), &grid).unwrap();
            assert_eq!(ev.evaluate(&mask), efect_error(&a, &b).unwrap().value());
        }
    }

    #[test]
    fn too_small_or_odd_rejected() {
        let cfg = ReproConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_error_distribution(&single(&[1.0, 2.0]), &cfg, &mut rng).is_err());
        assert!(matches!(
            sample_error_distribution(&single(&[1.0, 2.0, 3.0, 4.0, 5.0]), &cfg, &mut rng),
            Err(Error::OddSampleSize(5))
        ));
    }

    #[test]
    fn not_converged_carries_partial_stats() {
        let s = single(&[0.0, 0.0, 1.0, 1.0]);
        let cfg = ReproConfig { rel_tol: 1e-9, min_evals: 5, max_evals: 20, ..Default::default() };
        match sample_error_distribution(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(3)) {
            Err(Error::NotConverged { partial }) => assert_eq!(partial.count, 20),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn convergence_point_examples() {
        let cfg = ReproConfig::default();
        let st = |mean, stdev| ErrorStats { mean, stdev, count: 10, sample_size: 100 };
        assert!(meets_convergence_point(&st(0.0537, 0.00645), &cfg));
        assert!(!meets_convergence_point(&st(0.075, 0.0), &cfg));
        assert!(meets_convergence_point(&st(0.0, 0.0), &cfg));
        assert!(!meets_convergence_point(&st(0.060, 0.006), &cfg));
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_power_law(&[(100, 0.2), (400, 0.1), (1600, 0.05)]).unwrap();
        assert!((fit.coefficient - 2.0).abs() < 1e-12);
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_power_law() {
        let fit = fit_power_law(&[(10, 0.3), (20, 0.3), (40, 0.3)]).unwrap();
        assert_eq!(fit.exponent, 0.0);
    }

    #[test]
    fn power_law_input_checks() {
        assert!(fit_power_law(&[(10, 0.3), (20, 0.2)]).is_err());
        assert!(fit_power_law(&[(10, 0.3), (20, 0.0), (30, 0.1)]).is_err());
        assert!(fit_power_law(&[(10, 0.3), (10, 0.2), (30, 0.1)]).is_err());
    }

    #[test]
    fn required_size_examples() {
        let fit = PowerLawFit { coefficient: 2.0, exponent: -0.5, r_squared: 1.0 };
        // (0.075 / 2)^-2 = 711.1
        let n = estimate_required_size(&fit, 0.075).unwrap();
        assert_eq!(n, 712);
        assert!(2.0 * (712f64).powf(-0.5) <= 0.075);
        assert!(2.0 * (710f64).powf(-0.5) > 0.075);
        // (0.0375 / 2)^-2 = 2844.4
        assert_eq!(estimate_required_size(&fit, 0.0375).unwrap(), 2846);

        let unit = PowerLawFit { coefficient: 1.0, exponent: -1.0, r_squared: 1.0 };
        assert_eq!(estimate_required_size(&unit, 0.1).unwrap(), 10);
        assert_eq!(estimate_required_size(&fit, 2.0).unwrap(), 2);

        let flat = PowerLawFit { coefficient: 1.0, exponent: 0.0, r_squared: 1.0 };
        let err = estimate_required_size(&flat, 0.1).unwrap_err();
        assert!(err.to_string().contains("non-decreasing error; cannot extrapolate"));
    }

    #[test]
    fn constant_generator_accepted_at_initial_size() {
        let gen = |_first: usize, count: usize| Ok(single(&vec![1.0; count]));
        let out = grow_to_convergence(
            gen,
            &ReproConfig::default(),
            &GrowthConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(out.sample.run_count(), 100);
        assert_eq!((out.stats.mean, out.stats.stdev), (0.0, 0.0));
        assert_eq!(out.history.len(), 1);
    }
}
