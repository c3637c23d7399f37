//! Simulation samples: a runs × variables × times block of real results.
//!
//! Runs are the atomic unit. Every operation here treats a run as one whole
//! trajectory over all variables and times; there is no per-time subsetting.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Results of repeated executions of one stochastic simulation.
///
/// Values are stored flat in run-major order: the value of variable `v` at
/// time index `t` in run `r` lives at `r * V * T + v * T + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSample {
    variable_names: Vec<String>,
    times: Vec<f64>,
    values: Vec<f64>,
    run_count: usize,
}

/// Mean and sample standard deviation of one variable at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableTimeStats {
    pub mean: f64,
    pub stdev: f64,
}

/// Two disjoint, equally sized halves of a sample.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub left: SimulationSample,
    pub right: SimulationSample,
}

impl SimulationSample {
    /// Builds a sample from nested `[run][variable][time]` data.
    pub fn from_runs(
        variable_names: Vec<String>,
        times: Vec<f64>,
        runs: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        let (nv, nt) = (variable_names.len(), times.len());
        let mut values = Vec::with_capacity(runs.len() * nv * nt);
        for (r, run) in runs.iter().enumerate() {
            if run.len() != nv {
                return Err(Error::InvalidSample(format!(
                    "run {r} has {} variables, expected {nv}",
                    run.len()
                )));
            }
            for (v, series) in run.iter().enumerate() {
                if series.len() != nt {
                    return Err(Error::InvalidSample(format!(
                        "run {r}, variable {v} has {} values, expected {nt}",
                        series.len()
                    )));
                }
                values.extend_from_slice(series);
            }
        }
        Self::from_flat(variable_names, times, values)
    }

    /// Builds a sample from flat run-major values.
    pub fn from_flat(variable_names: Vec<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_metadata(&variable_names, &times)?;
        let stride = variable_names.len() * times.len();
        if values.len() % stride != 0 {
            return Err(Error::InvalidSample(format!(
                "{} values do not divide into runs of {stride}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite value in run {}",
                i / stride
            )));
        }
        Ok(Self {
            run_count: values.len() / stride,
            variable_names,
            times,
            values,
        })
    }

    /// A sample with metadata but no runs.
    pub fn empty(variable_names: Vec<String>, times: Vec<f64>) -> Result<Self> {
        Self::from_flat(variable_names, times, Vec::new())
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn run_count(&self) -> usize {
        self.run_count
    }

    pub fn num_variables(&self) -> usize {
        self.variable_names.len()
    }

    pub fn num_times(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.run_count == 0
    }

    /// Flat run-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn stride(&self) -> usize {
        self.variable_names.len() * self.times.len()
    }

    /// All values of one run, variable-major.
    pub fn run(&self, r: usize) -> &[f64] {
        let s = self.stride();
        &self.values[r * s..(r + 1) * s]
    }

    pub fn value(&self, run: usize, variable: usize, time: usize) -> f64 {
        self.values[run * self.stride() + variable * self.times.len() + time]
    }

    /// Values of one (variable, time) entry across all runs, in run order.
    pub fn column(&self, variable: usize, time: usize) -> Vec<f64> {
        let offset = variable * self.times.len() + time;
        self.values.iter().skip(offset).step_by(self.stride()).copied().collect()
    }

    /// Nested `[run][variable][time]` copy of the values.
    pub fn to_runs(&self) -> Vec<Vec<Vec<f64>>> {
        let nt = self.times.len();
        (0..self.run_count)
            .map(|r| self.run(r).chunks(nt.max(1)).map(<[f64]>::to_vec).collect())
            .collect()
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.variable_names == other.variable_names && self.times == other.times
    }

    /// A new sample holding the given runs in the given order.
    pub fn select(&self, runs: &[usize]) -> Self {
        let mut values = Vec::with_capacity(runs.len() * self.stride());
        for &r in runs {
            values.extend_from_slice(self.run(r));
        }
        Self {
            variable_names: self.variable_names.clone(),
            times: self.times.clone(),
            values,
            run_count: runs.len(),
        }
    }

    /// Per (variable, time) mean and sample standard deviation, variable-major.
    pub fn summary_stats(&self) -> Result<Vec<VariableTimeStats>> {
        if self.is_empty() {
            return Err(Error::EmptySample);
        }
        let (nv, nt) = (self.num_variables(), self.num_times());
        let mut out = Vec::with_capacity(nv * nt);
        for v in 0..nv {
            for t in 0..nt {
                // sorted so the sums do not depend on run order
                let mut col = self.column(v, t);
                col.sort_by(f64::total_cmp);
                out.push(column_stats(&col));
            }
        }
        Ok(out)
    }

    /// Splits the runs uniformly at random into two equal, disjoint halves.
    pub fn split_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SplitPair> {
        let (left, right) = split_indices(self.run_count, rng)?;
        Ok(SplitPair {
            left: self.select(&left),
            right: self.select(&right),
        })
    }

    /// Concatenates the runs of `self` followed by those of `other`.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if !self.same_layout(other) {
            return Err(Error::IncompatibleSamples(
                "variable names or times differ".into(),
            ));
        }
        let mut values = Vec::with_capacity(self.values.len() + other.values.len());
        values.extend_from_slice(&self.values);
        values.extend_from_slice(&other.values);
        Ok(Self {
            variable_names: self.variable_names.clone(),
            times: self.times.clone(),
            values,
            run_count: self.run_count + other.run_count,
        })
    }

    /// Rounds every value to `digits` significant decimal digits.
    pub fn round_sigfigs(&self, digits: u32) -> Result<Self> {
        check_sigfigs(digits)?;
        let mut out = self.clone();
        for v in &mut out.values {
            *v = round_to_sigfigs(*v, digits);
        }
        Ok(out)
    }
}

fn validate_metadata(variable_names: &[String], times: &[f64]) -> Result<()> {
    if variable_names.is_empty() {
        return Err(Error::InvalidSample("no variables".into()));
    }
    if times.is_empty() {
        return Err(Error::InvalidSample("no simulation times".into()));
    }
    for (i, name) in variable_names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::InvalidSample("empty variable name".into()));
        }
        if variable_names[..i].contains(name) {
            return Err(Error::InvalidSample(format!("duplicate variable name {name:?}")));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidSample("non-finite simulation time".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSample("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Arithmetic mean and sample (n - 1) standard deviation; stdev is 0 for one value.
pub fn column_stats(values: &[f64]) -> VariableTimeStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stdev = if values.len() < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    };
    VariableTimeStats { mean, stdev }
}

/// Uniformly random partition of `0..n` into two sorted halves.
pub fn split_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cannot split {n} runs into two halves")));
    }
    if n % 2 != 0 {
        return Err(Error::OddSampleSize(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut right = idx.split_off(n / 2);
    idx.sort_unstable();
    right.sort_unstable();
    Ok((idx, right))
}

pub(crate) fn check_sigfigs(digits: u32) -> Result<()> {
    if !(1..=17).contains(&digits) {
        return Err(Error::InvalidArgument(format!(
            "significant figures must be in 1..=17, got {digits}"
        )));
    }
    Ok(())
}

/// Rounds to `digits` significant decimal digits, ties to even.
///
/// Goes through the exact decimal expansion of the binary value, so the
/// result is the double nearest to the rounded decimal.
pub fn round_to_sigfigs(v: f64, digits: u32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let text = format!("{:.*e}", (digits - 1) as usize, v);
    text.parse().expect("formatted float parses")
}
