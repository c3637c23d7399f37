//! The EFECT error: the largest complex distance between two aligned ECF sets.

use std::fmt;

use crate::ecf::{evaluate_ecf_set, EcfConfig, EcfGrid, EcfSet};
use crate::error::{Error, Result};
use crate::sample::SimulationSample;

/// Supremum of `|φ_a(τ) - φ_b(τ)|` over all variables, times and grid points; in `[0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EfectError(f64);

impl EfectError {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for EfectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Result of comparing two samples, with a per-variable breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub delta: EfectError,
    /// Largest distance per variable, in variable order. Diagnostic only.
    pub per_variable: Vec<f64>,
}

fn check_aligned(a: &EcfSet, b: &EcfSet) -> Result<()> {
    let (ga, gb) = (a.grid(), b.grid());
    if ga.num_variables() != gb.num_variables() || ga.num_times() != gb.num_times() {
        return Err(Error::NotAligned("different entry counts".into()));
    }
    if ga.num_points() != gb.num_points() {
        return Err(Error::NotAligned(format!(
            "different grid sizes ({} vs {})",
            ga.num_points(),
            gb.num_points()
        )));
    }
    if ga.tau_max_values() != gb.tau_max_values() {
        return Err(Error::NotAligned("different tau_max".into()));
    }
    Ok(())
}

/// Largest distance per variable between two aligned sets.
pub fn per_variable_error(a: &EcfSet, b: &EcfSet) -> Result<Vec<f64>> {
    check_aligned(a, b)?;
    let per_var = a.grid().num_times() * a.grid().num_points();
    Ok(a.values()
        .chunks(per_var)
        .zip(b.values().chunks(per_var))
        .map(|(x, y)| max_distance(x, y))
        .collect())
}

/// EFECT error between two ECF sets evaluated on the same grid.
pub fn efect_error(a: &EcfSet, b: &EcfSet) -> Result<EfectError> {
    check_aligned(a, b)?;
    Ok(EfectError(max_distance(a.values(), b.values())))
}

pub(crate) fn max_distance(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Grid shared by two samples, built from the statistics of their union.
pub fn pooled_grid(a: &SimulationSample, b: &SimulationSample, config: EcfConfig) -> Result<EcfGrid> {
    EcfGrid::for_sample(&a.merge(b)?, config)
}

/// EFECT error between two samples on their pooled grid.
pub fn compare_samples(a: &SimulationSample, b: &SimulationSample, config: EcfConfig) -> Result<EfectError> {
    Ok(compare_samples_detailed(a, b, config)?.delta)
}

pub fn compare_samples_detailed(
    a: &SimulationSample,
    b: &SimulationSample,
    config: EcfConfig,
) -> Result<Comparison> {
    if !a.same_layout(b) {
        return Err(Error::IncompatibleSamples("variable names or times differ".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let grid = pooled_grid(a, b, config)?;
    let ea = evaluate_ecf_set(a, &grid)?;
    let eb = evaluate_ecf_set(b, &grid)?;
    let per_variable = per_variable_error(&ea, &eb)?;
    let delta = EfectError(per_variable.iter().copied().fold(0.0, f64::max));
    Ok(Comparison { delta, per_variable })
}
