//! Reproducibility testing for stochastic simulation results.
//!
//! Two simulation samples are compared through their empirical
//! characteristic functions (ECFs). The EFECT error between two samples is
//! the largest complex distance between their ECFs over every variable,
//! simulation time and transform-variable grid point, and lies in `[0, 2]`.
//!
//! * A modeler checks that a sample is reproducible by splitting it into
//!   random halves many times ([`repro::sample_error_distribution`]), grows
//!   it until the errors meet a convergence point
//!   ([`repro::grow_to_convergence`]), and publishes an [`EfectReport`].
//! * A curator regenerates a sample of the reported size and checks it
//!   against the report ([`verify::verify_report`]).
//!
//! The `examples/` directory walks through each of these steps.

pub mod cli;
pub mod distribution;
pub mod ecf;
pub mod error;
pub mod harness;
pub mod metric;
pub mod report;
pub mod repro;
pub mod rng;
pub mod sample;
pub mod verify;

pub use distribution::DistributionSpec;
pub use ecf::{evaluate_ecf, evaluate_ecf_set, tau_max, EcfConfig, EcfGrid, EcfSet};
pub use error::{Error, Result};
pub use metric::{compare_samples, compare_samples_detailed, efect_error, Comparison, EfectError};
pub use report::{build_report, read_report, read_sample, write_report, write_sample, EfectReport};
pub use repro::{
    estimate_required_size, fit_power_law, grow_to_convergence, meets_convergence_point,
    sample_error_distribution, ErrorStats, GrowthConfig, GrowthOutcome, HistoryPoint, PowerLawFit,
    ReproConfig,
};
pub use sample::{SimulationSample, SplitPair, VariableTimeStats};
pub use verify::{chebyshev_pvalue, decide, verify_report, VerificationResult};
