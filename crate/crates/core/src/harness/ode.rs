//! Deterministic ODE models with randomly sampled inputs, integrated with
//! fixed-step classical Runge-Kutta.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::sample::SimulationSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeModelId {
    /// Kermack-McKendrick SIR: `S' = -βSI/N`, `I' = βSI/N - γI`, `R' = γI`.
    Sir,
    /// `x = sin(ωt)`, `y = A cos(ωt)`: two variables of very different size.
    OscillatorPair,
    /// Every variable keeps its initial value.
    Constant,
}

impl OdeModelId {
    fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Self::Sir => &["beta", "gamma"],
            Self::OscillatorPair => &["omega", "amplitude"],
            Self::Constant => &[],
        }
    }

    fn state_len(self) -> Option<usize> {
        match self {
            Self::Sir => Some(3),
            Self::OscillatorPair => Some(2),
            Self::Constant => None,
        }
    }

    fn rhs(self, p: &[f64], y: &[f64], dy: &mut [f64]) {
        match self {
            Self::Sir => {
                let (beta, gamma) = (p[0], p[1]);
                let n = y[0] + y[1] + y[2];
                let infection = beta * y[0] * y[1] / n;
                let recovery = gamma * y[1];
                dy[0] = -infection;
                dy[1] = infection - recovery;
                dy[2] = recovery;
            }
            Self::OscillatorPair => {
                let (omega, amp) = (p[0], p[1]);
                dy[0] = omega * y[1] / amp;
                dy[1] = -omega * amp * y[0];
            }
            Self::Constant => dy.fill(0.0),
        }
    }
}

/// An ODE model, its nominal inputs, and which inputs are drawn at random.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeModelSpec {
    pub model_id: OdeModelId,
    pub parameters: BTreeMap<String, f64>,
    /// Variables in output order with their initial values.
    pub initial_conditions: Vec<(String, f64)>,
    pub sampled_inputs: Vec<DistributionSpec>,
    /// Fixed integration step.
    pub step: f64,
}

impl OdeModelSpec {
    pub fn variable_names(&self) -> Vec<String> {
        self.initial_conditions.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("integration step must be > 0, got {}", self.step)));
        }
        if self.initial_conditions.is_empty() {
            return Err(Error::InvalidArgument("model has no variables".into()));
        }
        if let Some(n) = self.model_id.state_len() {
            if self.initial_conditions.len() != n {
                return Err(Error::InvalidArgument(format!("{:?} needs {n} variables", self.model_id)));
            }
        }
        for name in self.model_id.parameter_names() {
            if !self.parameters.contains_key(*name) {
                return Err(Error::InvalidArgument(format!("missing parameter {name:?}")));
            }
        }
        for d in &self.sampled_inputs {
            d.validate()?;
            let known = self.parameters.contains_key(&d.target)
                || self.initial_conditions.iter().any(|(n, _)| *n == d.target);
            if !known {
                return Err(Error::InvalidArgument(format!(
                    "sampled input {:?} is not a parameter or initial condition",
                    d.target
                )));
            }
        }
        Ok(())
    }

    /// Integrates run `run` (inputs drawn from stream `run` of `seed`).
    fn simulate_run(&self, run: usize, times: &[f64], seed: u64, out: &mut [f64]) -> Result<()> {
        let mut rng = stream_rng(seed, run as u64);
        let mut params = self.parameters.clone();
        let mut y: Vec<f64> = self.initial_conditions.iter().map(|(_, v)| *v).collect();
        for d in &self.sampled_inputs {
            let value = d.sample(&mut rng)?;
            if let Some(p) = params.get_mut(&d.target) {
                *p = value;
            } else if let Some(i) = self.initial_conditions.iter().position(|(n, _)| *n == d.target) {
                y[i] = value;
            }
        }
        let p: Vec<f64> = self.model_id.parameter_names().iter().map(|n| params[*n]).collect();

        let dim = y.len();
        let nt = times.len();
        let h = self.step;
        let mut k = vec![vec![0.0; dim]; 4];
        let mut tmp = vec![0.0; dim];
        let mut steps_done = 0u64;
        for (ti, &t) in times.iter().enumerate() {
            // nearest completed step
            let target = (t / h).round() as u64;
            while steps_done < target {
                rk4_step(self.model_id, &p, &mut y, h, &mut k, &mut tmp);
                steps_done += 1;
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration { run, time: t });
            }
            for (v, &val) in y.iter().enumerate() {
                out[v * nt + ti] = val;
            }
        }
        Ok(())
    }
}

fn rk4_step(model: OdeModelId, p: &[f64], y: &mut [f64], h: f64, k: &mut [Vec<f64>], tmp: &mut [f64]) {
    let dim = y.len();
    model.rhs(p, y, &mut k[0]);
    for i in 0..dim {
        tmp[i] = y[i] + 0.5 * h * k[0][i];
    }
    model.rhs(p, tmp, &mut k[1]);
    for i in 0..dim {
        tmp[i] = y[i] + 0.5 * h * k[1][i];
    }
    model.rhs(p, tmp, &mut k[2]);
    for i in 0..dim {
        tmp[i] = y[i] + h * k[2][i];
    }
    model.rhs(p, tmp, &mut k[3]);
    for i in 0..dim {
        y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("simulation times must be finite and >= 0".into()));
    }
    Ok(())
}

/// Runs `first..first + count` of the sampled ODE model.
pub fn simulate_ode_range(
    spec: &OdeModelSpec,
    first: usize,
    count: usize,
    times: &[f64],
    seed: u64,
) -> Result<SimulationSample> {
    spec.validate()?;
    check_times(times)?;
    let stride = spec.initial_conditions.len() * times.len();
    let runs: Vec<Vec<f64>> = (first..first + count)
        .into_par_iter()
        .map(|run| {
            let mut out = vec![0.0; stride];
            spec.simulate_run(run, times, seed, &mut out).map(|_| out)
        })
        .collect::<Result<_>>()?;
    SimulationSample::from_flat(spec.variable_names(), times.to_vec(), runs.concat())
}

/// `n` runs of the sampled ODE model.
pub fn simulate_ode_sampled(spec: &OdeModelSpec, n: usize, times: &[f64], seed: u64) -> Result<SimulationSample> {
    simulate_ode_range(spec, 0, n, times, seed)
}
