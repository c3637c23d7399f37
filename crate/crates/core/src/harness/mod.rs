//! Built-in stochastic result generators.
//!
//! Two sources of variability are covered: deterministic ODEs whose inputs
//! are drawn at random per run, and intrinsically stochastic reaction
//! networks simulated with the Gillespie direct method. Run `r` always draws
//! from its own random stream, so a sample can grow without changing the
//! runs it already holds.

pub mod ode;
pub mod ssa;

use std::collections::BTreeMap;

pub use ode::{simulate_ode_range, simulate_ode_sampled, OdeModelId, OdeModelSpec};
pub use ssa::{simulate_ssa, simulate_ssa_range, Reaction, ReactionNetworkSpec};

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::sample::SimulationSample;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Ode(OdeModelSpec),
    Ssa(ReactionNetworkSpec),
}

impl ModelSpec {
    /// Distributions of randomly drawn inputs (empty for reaction networks).
    pub fn input_sampling(&self) -> Vec<DistributionSpec> {
        match self {
            Self::Ode(s) => s.sampled_inputs.clone(),
            Self::Ssa(_) => Vec::new(),
        }
    }

    pub fn variable_names(&self) -> Vec<String> {
        match self {
            Self::Ode(s) => s.variable_names(),
            Self::Ssa(s) => s.species_names(),
        }
    }

    /// Overrides a nominal parameter, initial value, species count or reaction rate.
    pub fn set_value(&mut self, name: &str, value: f64) -> Result<()> {
        match self {
            Self::Ode(s) => {
                if let Some(p) = s.parameters.get_mut(name) {
                    *p = value;
                } else if let Some((_, v)) = s.initial_conditions.iter_mut().find(|(n, _)| n == name) {
                    *v = value;
                } else {
                    return Err(Error::InvalidArgument(format!("model has no parameter or variable {name:?}")));
                }
            }
            Self::Ssa(s) => {
                if let Some((_, c)) = s.species.iter_mut().find(|(n, _)| n == name) {
                    if !(value >= 0.0 && value.fract() == 0.0) {
                        return Err(Error::InvalidArgument(format!("species count must be a non-negative integer, got {value}")));
                    }
                    *c = value as u64;
                } else if let Some(r) = s.reactions.iter_mut().find(|r| r.name == name) {
                    r.rate = value;
                } else {
                    return Err(Error::InvalidArgument(format!("model has no species or reaction {name:?}")));
                }
            }
        }
        Ok(())
    }

    /// Multiplies the location and scale of the sampled input `target`.
    pub fn scale_input(&mut self, target: &str, factor: f64) -> Result<()> {
        let Self::Ode(s) = self else {
            return Err(Error::InvalidArgument("reaction networks have no sampled inputs".into()));
        };
        let d = s
            .sampled_inputs
            .iter_mut()
            .find(|d| d.target == target)
            .ok_or_else(|| Error::InvalidArgument(format!("no sampled input named {target:?}")))?;
        *d = d.scaled(factor);
        Ok(())
    }

    /// Runs `first..first + count`.
    pub fn simulate_range(&self, first: usize, count: usize, times: &[f64], seed: u64) -> Result<SimulationSample> {
        match self {
            Self::Ode(s) => simulate_ode_range(s, first, count, times, seed),
            Self::Ssa(s) => simulate_ssa_range(s, first, count, times, seed),
        }
    }

    pub fn simulate(&self, n: usize, times: &[f64], seed: u64) -> Result<SimulationSample> {
        self.simulate_range(0, n, times, seed)
    }
}

/// A named catalog model with its default output times.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub spec: ModelSpec,
    pub default_times: Vec<f64>,
}

fn every(step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 * step).collect()
}

fn sir_conditions() -> Vec<(String, f64)> {
    vec![("S".into(), 990.0), ("I".into(), 10.0), ("R".into(), 0.0)]
}

pub fn builtin_models() -> Vec<CatalogEntry> {
    let sir = OdeModelSpec {
        model_id: OdeModelId::Sir,
        parameters: BTreeMap::from([("beta".into(), 0.3), ("gamma".into(), 0.1)]),
        initial_conditions: sir_conditions(),
        sampled_inputs: vec![DistributionSpec::normal("beta", 0.3, 0.03)],
        step: 0.1,
    };
    let oscillator = OdeModelSpec {
        model_id: OdeModelId::OscillatorPair,
        parameters: BTreeMap::from([("omega".into(), 1.0), ("amplitude".into(), 1000.0)]),
        initial_conditions: vec![("x".into(), 0.0), ("y".into(), 1000.0)],
        sampled_inputs: vec![DistributionSpec::normal("omega", 1.0, 0.1)],
        step: 0.01,
    };
    let constant = OdeModelSpec {
        model_id: OdeModelId::Constant,
        parameters: BTreeMap::new(),
        initial_conditions: sir_conditions(),
        sampled_inputs: vec![],
        step: 0.1,
    };
    let seir = ReactionNetworkSpec {
        species: vec![("S".into(), 190), ("E".into(), 0), ("I".into(), 10), ("R".into(), 0)],
        reactions: vec![
            Reaction { name: "infection".into(), rate: 0.5 / 200.0, reactants: vec![(0, 1), (2, 1)], products: vec![(1, 1), (2, 1)] },
            Reaction { name: "onset".into(), rate: 0.2, reactants: vec![(1, 1)], products: vec![(2, 1)] },
            Reaction { name: "recovery".into(), rate: 0.1, reactants: vec![(2, 1)], products: vec![(3, 1)] },
        ],
    };
    let birth_death = ReactionNetworkSpec {
        species: vec![("X".into(), 0)],
        reactions: vec![
            Reaction { name: "birth".into(), rate: 10.0, reactants: vec![], products: vec![(0, 1)] },
            Reaction { name: "death".into(), rate: 0.1, reactants: vec![(0, 1)], products: vec![] },
        ],
    };
    vec![
        CatalogEntry {
            id: "sir",
            description: "SIR epidemic ODE, infection rate beta ~ Normal(0.3, 0.03)",
            spec: ModelSpec::Ode(sir),
            default_times: every(10.0, 11),
        },
        CatalogEntry {
            id: "oscillator_pair",
            description: "x = sin(wt), y = 1000 cos(wt) ODE, w ~ Normal(1, 0.1)",
            spec: ModelSpec::Ode(oscillator),
            default_times: every(1.0, 11),
        },
        CatalogEntry {
            id: "constant",
            description: "S, I, R held at the SIR initial values",
            spec: ModelSpec::Ode(constant),
            default_times: every(10.0, 11),
        },
        CatalogEntry {
            id: "seir_ssa",
            description: "SEIR epidemic reaction network, Gillespie direct method",
            spec: ModelSpec::Ssa(seir),
            default_times: every(10.0, 11),
        },
        CatalogEntry {
            id: "birth_death_ssa",
            description: "Immigration-death process, Gillespie direct method",
            spec: ModelSpec::Ssa(birth_death),
            default_times: every(5.0, 11),
        },
    ]
}

pub fn lookup(id: &str) -> Result<CatalogEntry> {
    let models = builtin_models();
    let valid = models.iter().map(|m| m.id.to_string()).collect();
    models
        .into_iter()
        .find(|m| m.id == id)
        .ok_or_else(|| Error::UnknownModel { id: id.into(), valid })
}
