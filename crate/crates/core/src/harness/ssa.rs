//! Gillespie direct-method simulation of mass-action reaction networks.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::sample::SimulationSample;

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub name: String,
    pub rate: f64,
    /// `(species index, stoichiometric coefficient)` consumed.
    pub reactants: Vec<(usize, u32)>,
    /// `(species index, stoichiometric coefficient)` produced.
    pub products: Vec<(usize, u32)>,
}

impl Reaction {
    /// Mass-action propensity `k · Π x(x-1)…(x-c+1)`.
    fn propensity(&self, state: &[i64]) -> f64 {
        let mut a = self.rate;
        for &(s, c) in &self.reactants {
            for i in 0..c as i64 {
                a *= (state[s] - i).max(0) as f64;
            }
        }
        a
    }

    fn fire(&self, state: &mut [i64]) {
        for &(s, c) in &self.reactants {
            state[s] -= c as i64;
        }
        for &(s, c) in &self.products {
            state[s] += c as i64;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetworkSpec {
    /// Species names with initial counts.
    pub species: Vec<(String, u64)>,
    pub reactions: Vec<Reaction>,
}

impl ReactionNetworkSpec {
    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.is_empty() {
            return Err(Error::InvalidArgument("reaction network has no species".into()));
        }
        for r in &self.reactions {
            if !(r.rate >= 0.0 && r.rate.is_finite()) {
                return Err(Error::InvalidArgument(format!("reaction {:?} has invalid rate {}", r.name, r.rate)));
            }
            if r.reactants.iter().chain(&r.products).any(|&(s, _)| s >= self.species.len()) {
                return Err(Error::InvalidArgument(format!("reaction {:?} names an unknown species", r.name)));
            }
        }
        Ok(())
    }

    fn simulate_run(&self, rng: &mut StreamRng, times: &[f64], out: &mut [f64]) {
        let nt = times.len();
        let mut state: Vec<i64> = self.species.iter().map(|(_, c)| *c as i64).collect();
        let mut props = vec![0.0; self.reactions.len()];
        let mut t = 0.0;
        let mut next_record = 0;
        while next_record < nt {
            for (a, r) in props.iter_mut().zip(&self.reactions) {
                *a = r.propensity(&state);
            }
            let total: f64 = props.iter().sum();
            let next_event = if total > 0.0 {
                let wait: f64 = Exp1.sample(rng);
                t + wait / total
            } else {
                f64::INFINITY
            };
            // record the state holding on [t, next_event)
            while next_record < nt && times[next_record] < next_event {
                for (s, &count) in state.iter().enumerate() {
                    out[s * nt + next_record] = count as f64;
                }
                next_record += 1;
            }
            if next_record == nt {
                break;
            }
            let mut pick = rng.random::<f64>() * total;
            let mut chosen = props.len() - 1;
            for (i, &a) in props.iter().enumerate() {
                if pick < a {
                    chosen = i;
                    break;
                }
                pick -= a;
            }
            // guard against rounding landing on a zero-propensity tail entry
            while props[chosen] == 0.0 {
                chosen -= 1;
            }
            self.reactions[chosen].fire(&mut state);
            t = next_event;
        }
    }
}

/// Runs `first..first + count`; run `r` draws from stream `r` of `seed`.
pub fn simulate_ssa_range(
    spec: &ReactionNetworkSpec,
    first: usize,
    count: usize,
    times: &[f64],
    seed: u64,
) -> Result<SimulationSample> {
    spec.validate()?;
    super::ode::check_times(times)?;
    let stride = spec.species.len() * times.len();
    let runs: Vec<Vec<f64>> = (first..first + count)
        .into_par_iter()
        .map(|run| {
            let mut rng = stream_rng(seed, run as u64);
            let mut out = vec![0.0; stride];
            spec.simulate_run(&mut rng, times, &mut out);
            out
        })
        .collect();
    SimulationSample::from_flat(spec.species_names(), times.to_vec(), runs.concat())
}

/// `n` independent trajectories sampled at `times`.
pub fn simulate_ssa(spec: &ReactionNetworkSpec, n: usize, times: &[f64], seed: u64) -> Result<SimulationSample> {
    simulate_ssa_range(spec, 0, n, times, seed)
}
