//! Empirical characteristic functions over a per-entry transform-variable grid.
//!
//! For each (variable, time) entry the grid is `K` uniform points on
//! `[0, 2πm/σ]`, where `σ` is the entry's standard deviation. The ECF of
//! values `x_1..x_n` at `τ` is `(1/n) Σ exp(i x_j τ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sample::{SimulationSample, VariableTimeStats};

/// Grid shape: number of periods `m` and number of grid points `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcfConfig {
    pub num_periods: f64,
    pub num_points: usize,
}

impl Default for EcfConfig {
    fn default() -> Self {
        Self { num_periods: 3.0, num_points: 100 }
    }
}

impl EcfConfig {
    pub fn new(num_periods: f64, num_points: usize) -> Result<Self> {
        let c = Self { num_periods, num_points };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.num_periods.is_finite() && self.num_periods >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "number of periods must be >= 1, got {}",
                self.num_periods
            )));
        }
        if self.num_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "number of grid points must be >= 2, got {}",
                self.num_points
            )));
        }
        Ok(())
    }
}

/// Upper end of the transform-variable domain for one entry.
///
/// A zero standard deviation falls back to `2πm` (as if σ were 1), which
/// keeps the grid finite and still separates distinct constants by phase.
pub fn tau_max(stdev: f64, num_periods: f64) -> f64 {
    if stdev > 0.0 {
        2.0 * PI * num_periods / stdev
    } else {
        2.0 * PI * num_periods
    }
}

/// One `tau_max` per (variable, time), variable-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EcfGrid {
    config: EcfConfig,
    num_variables: usize,
    num_times: usize,
    tau_max: Vec<f64>,
}

impl EcfGrid {
    /// Builds the grid from per-entry statistics (variable-major order).
    pub fn from_stats(
        stats: &[VariableTimeStats],
        num_variables: usize,
        num_times: usize,
        config: EcfConfig,
    ) -> Result<Self> {
        if stats.len() != num_variables * num_times {
            return Err(Error::InvalidArgument(format!(
                "{} statistics for {num_variables} variables x {num_times} times",
                stats.len()
            )));
        }
        let tau_max = stats.iter().map(|s| tau_max(s.stdev, config.num_periods)).collect();
        Self::from_tau_max(tau_max, num_variables, num_times, config)
    }

    /// Builds the grid of a sample from its own statistics.
    pub fn for_sample(sample: &SimulationSample, config: EcfConfig) -> Result<Self> {
        let stats = sample.summary_stats()?;
        Self::from_stats(&stats, sample.num_variables(), sample.num_times(), config)
    }

    /// Rebuilds a grid from stored per-entry maxima.
    pub fn from_tau_max(
        tau_max: Vec<f64>,
        num_variables: usize,
        num_times: usize,
        config: EcfConfig,
    ) -> Result<Self> {
        config.validate()?;
        if tau_max.len() != num_variables * num_times {
            return Err(Error::InvalidArgument("tau_max count does not match entries".into()));
        }
        if let Some(t) = tau_max.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidArgument(format!("tau_max must be finite and > 0, got {t}")));
        }
        Ok(Self { config, num_variables, num_times, tau_max })
    }

    pub fn config(&self) -> EcfConfig {
        self.config
    }

    pub fn num_points(&self) -> usize {
        self.config.num_points
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn num_times(&self) -> usize {
        self.num_times
    }

    pub fn num_entries(&self) -> usize {
        self.tau_max.len()
    }

    /// Variable-major per-entry maxima.
    pub fn tau_max_values(&self) -> &[f64] {
        &self.tau_max
    }

    pub fn tau_max(&self, variable: usize, time: usize) -> f64 {
        self.tau_max[variable * self.num_times + time]
    }

    /// Spacing between consecutive grid points of entry `idx`.
    pub fn step(&self, idx: usize) -> f64 {
        self.tau_max[idx] / (self.config.num_points - 1) as f64
    }

    /// Grid points `τ_j = j · tau_max / (K - 1)` of entry `idx`.
    pub fn taus(&self, idx: usize) -> Vec<f64> {
        let k = self.config.num_points;
        (0..k).map(|j| j as f64 * self.tau_max[idx] / (k - 1) as f64).collect()
    }

    fn check_sample(&self, sample: &SimulationSample) -> Result<()> {
        if sample.num_variables() != self.num_variables || sample.num_times() != self.num_times {
            return Err(Error::NotAligned(format!(
                "grid covers {}x{} entries, sample has {}x{}",
                self.num_variables,
                self.num_times,
                sample.num_variables(),
                sample.num_times()
            )));
        }
        Ok(())
    }
}

/// ECF evaluations aligned to an [`EcfGrid`], `K` values per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EcfSet {
    grid: EcfGrid,
    values: Vec<Complex64>,
}

impl EcfSet {
    /// Wraps precomputed evaluations; checks shape and the `|φ| ≤ 1`, `φ(0) = 1` invariants.
    pub fn from_parts(grid: EcfGrid, values: Vec<Complex64>) -> Result<Self> {
        let k = grid.num_points();
        if values.len() != grid.num_entries() * k {
            return Err(Error::InvalidArgument("ECF value count does not match grid".into()));
        }
        for (i, entry) in values.chunks(k).enumerate() {
            if entry[0] != Complex64::new(1.0, 0.0) {
                return Err(Error::InvalidArgument(format!("ECF entry {i} is not 1 at tau = 0")));
            }
            if let Some(z) = entry.iter().find(|z| !(z.norm() <= 1.0 + 1e-12)) {
                return Err(Error::InvalidArgument(format!(
                    "ECF entry {i} has modulus {} > 1",
                    z.norm()
                )));
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &EcfGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn entry(&self, variable: usize, time: usize) -> &[Complex64] {
        let k = self.grid.num_points();
        let idx = variable * self.grid.num_times + time;
        &self.values[idx * k..(idx + 1) * k]
    }

    /// Entries in variable-major order.
    pub fn entries(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks(self.grid.num_points())
    }
}

/// ECF of `values` at arbitrary transform-variable points.
pub fn evaluate_ecf(values: &[f64], taus: &[f64]) -> Result<Vec<Complex64>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len() as f64;
    Ok(taus
        .iter()
        .map(|&tau| {
            if tau == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let (mut re, mut im) = (0.0, 0.0);
            for &x in values {
                let (s, c) = (x * tau).sin_cos();
                re += c;
                im += s;
            }
            Complex64::new(re / n, im / n)
        })
        .collect())
}

/// ECFs of every (variable, time) entry of `sample` on `grid`.
///
/// Each entry's values are summed in ascending order, so the result is
/// bit-identical under any permutation of the runs.
pub fn evaluate_ecf_set(sample: &SimulationSample, grid: &EcfGrid) -> Result<EcfSet> {
    grid.check_sample(sample)?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let k = grid.num_points();
    let nt = grid.num_times;
    let n = sample.run_count() as f64;
    let per_entry: Vec<Vec<Complex64>> = (0..grid.num_entries())
        .into_par_iter()
        .map(|idx| {
            let mut col = sample.column(idx / nt, idx % nt);
            col.sort_by(f64::total_cmp);
            let mut acc = vec![Complex64::new(0.0, 0.0); k];
            accumulate_phasors(col.iter().copied(), grid.step(idx), &mut acc);
            acc.iter_mut().for_each(|z| *z /= n);
            acc
        })
        .collect();
    Ok(EcfSet { grid: grid.clone(), values: per_entry.concat() })
}

/// Adds `exp(i x j step)` for `j = 0..acc.len()` into `acc` for every `x`.
///
/// Powers come from repeated multiplication by `exp(i x step)`; four values
/// are advanced together to keep independent multiply chains in flight.
pub(crate) fn accumulate_phasors<I>(xs: I, step: f64, acc: &mut [Complex64])
where
    I: Iterator<Item = f64>,
{
    let phasor = |x: f64| {
        let (s, c) = (x * step).sin_cos();
        Complex64::new(c, s)
    };
    let one = Complex64::new(1.0, 0.0);
    let mut buf = [0.0f64; 4];
    let mut filled = 0;
    let flush4 = |b: &[f64; 4], acc: &mut [Complex64]| {
        let w = [phasor(b[0]), phasor(b[1]), phasor(b[2]), phasor(b[3])];
        let mut z = [one; 4];
        for a in acc.iter_mut() {
            *a += (z[0] + z[1]) + (z[2] + z[3]);
            for i in 0..4 {
                z[i] *= w[i];
            }
        }
    };
    for x in xs {
        buf[filled] = x;
        filled += 1;
        if filled == 4 {
            flush4(&buf, acc);
            filled = 0;
        }
    }
    for &x in &buf[..filled] {
        let w = phasor(x);
        let mut z = one;
        for a in acc.iter_mut() {
            *a += z;
            z *= w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample_of(cols: &[&[f64]]) -> SimulationSample {
        // one variable, one time per column slice; runs along the slice
        let n = cols[0].len();
        let runs: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|r| vec![cols.iter().map(|c| c[r]).collect()])
            .collect();
        let times = (0..cols.len()).map(|t| t as f64).collect();
        SimulationSample::from_runs(vec!["x".into()], times, &runs).unwrap()
    }

    #[test]
    fn tau_max_examples() {
        assert!((tau_max(1.0, 3.0) - 6.0 * PI).abs() < 1e-12);
        assert!((tau_max(2.0, 3.0) - 3.0 * PI).abs() < 1e-12);
        assert_eq!(tau_max(0.0, 3.0), 6.0 * PI);
    }

    #[test]
    fn grid_endpoints() {
        let stats = [VariableTimeStats { mean: 0.0, stdev: 1.0 }];
        let g = EcfGrid::from_stats(&stats, 1, 1, EcfConfig::default()).unwrap();
        let taus = g.taus(0);
        assert_eq!(taus.len(), 100);
        assert_eq!(taus[0], 0.0);
        assert!((taus[99] - 6.0 * PI).abs() < 1e-12);
        let d = taus[1] - taus[0];
        assert!(taus.windows(2).all(|w| ((w[1] - w[0]) - d).abs() < 1e-12));
    }

    #[test]
    fn grid_per_time_and_constant_fallback() {
        let stats = [
            VariableTimeStats { mean: 0.0, stdev: 1.0 },
            VariableTimeStats { mean: 0.0, stdev: 2.0 },
            VariableTimeStats { mean: 5.0, stdev: 0.0 },
        ];
        let g = EcfGrid::from_stats(&stats, 1, 3, EcfConfig::default()).unwrap();
        assert!((g.tau_max(0, 0) - 6.0 * PI).abs() < 1e-12);
        assert!((g.tau_max(0, 1) - 3.0 * PI).abs() < 1e-12);
        assert_eq!(g.tau_max(0, 2), 6.0 * PI);
    }

    #[test]
    fn config_validation() {
        assert!(EcfConfig::new(0.5, 100).is_err());
        assert!(EcfConfig::new(3.0, 1).is_err());
        assert!(EcfConfig::new(1.0, 2).is_ok());
    }

    #[test]
    fn ecf_identities() {
        let xs = [0.3, -1.2, 4.0];
        assert_eq!(evaluate_ecf(&xs, &[0.0]).unwrap()[0], Complex64::new(1.0, 0.0));

        let z = evaluate_ecf(&[2.0], &[0.7]).unwrap()[0];
        assert!((z - Complex64::new((1.4f64).cos(), (1.4f64).sin())).norm() < 1e-15);

        let z = evaluate_ecf(&[-1.0, 1.0], &[0.9]).unwrap()[0];
        assert!((z.re - 0.9f64.cos()).abs() < 1e-15);
        assert!(z.im.abs() < 1e-15);

        assert!(matches!(evaluate_ecf(&[], &[1.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn normal_cf_oracle() {
        let (mu, sigma) = (2.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let d = Normal::new(mu, sigma).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let s = sample_of(&[&xs]);
        let grid = EcfGrid::for_sample(&s, EcfConfig::default()).unwrap();
        let set = evaluate_ecf_set(&s, &grid).unwrap();
        let worst = grid
            .taus(0)
            .iter()
            .zip(set.entry(0, 0))
            .map(|(&t, z)| {
                let cf = Complex64::from_polar((-sigma * sigma * t * t / 2.0).exp(), mu * t);
                (z - cf).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "max deviation {worst}");
    }

    #[test]
    fn grid_kernel_matches_direct_sum() {
        let xs = [0.1, 2.5, -3.25, 7.0, 1.5, 0.0, 9.75];
        let s = sample_of(&[&xs]);
        let grid = EcfGrid::for_sample(&s, EcfConfig::new(3.0, 50).unwrap()).unwrap();
        let set = evaluate_ecf_set(&s, &grid).unwrap();
        let direct = evaluate_ecf(&xs, &grid.taus(0)).unwrap();
        for (a, b) in set.entry(0, 0).iter().zip(&direct) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_sample_has_unit_modulus() {
        let s = sample_of(&[&[4.2; 6]]);
        let grid = EcfGrid::for_sample(&s, EcfConfig::default()).unwrap();
        let set = evaluate_ecf_set(&s, &grid).unwrap();
        assert!(set.values().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn permutation_gives_identical_set() {
        let xs = [0.5, 1.5, -2.0, 3.25, 8.0, -0.75];
        let mut ys = xs;
        ys.reverse();
        ys.swap(0, 3);
        let a = sample_of(&[&xs]);
        let b = sample_of(&[&ys]);
        let grid = EcfGrid::for_sample(&a, EcfConfig::default()).unwrap();
        assert_eq!(grid, EcfGrid::for_sample(&b, EcfConfig::default()).unwrap());
        assert_eq!(evaluate_ecf_set(&a, &grid).unwrap(), evaluate_ecf_set(&b, &grid).unwrap());
    }

    #[test]
    fn scaled_sample_matches_scaled_tau() {
        // φ_{aX}(τ) = φ_X(aτ): evaluate aX on a grid of step h and X on step a·h.
        let xs = [0.25, -1.0, 2.0, 3.5, 0.75];
        let a = 2.0;
        let ys: Vec<f64> = xs.iter().map(|x| a * x).collect();
        let cfg = EcfConfig::new(3.0, 40).unwrap();
        let gy = EcfGrid::from_tau_max(vec![5.0], 1, 1, cfg).unwrap();
        let gx = EcfGrid::from_tau_max(vec![5.0 * a], 1, 1, cfg).unwrap();
        let ey = evaluate_ecf_set(&sample_of(&[&ys]), &gy).unwrap();
        let ex = evaluate_ecf_set(&sample_of(&[&xs]), &gx).unwrap();
        for (p, q) in ey.values().iter().zip(ex.values()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn misaligned_grid_rejected() {
        let s = sample_of(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let g = EcfGrid::from_tau_max(vec![1.0], 1, 1, EcfConfig::default()).unwrap();
        assert!(matches!(evaluate_ecf_set(&s, &g), Err(Error::NotAligned(_))));
    }
}
