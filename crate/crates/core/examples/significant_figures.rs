//! Two simulators printing different numbers of digits disagree in the last
//! places. Rounding both to the same significant figures removes that
//! difference before comparison.
//!
//! The effect is drastic for entries that are constant within each sample,
//! such as an initial value: if the constants differ at all, the two samples
//! are perfectly separable and the error is close to its maximum of 2.
//!
//! cargo run --example significant_figures

use efect::harness::lookup;
use efect::{compare_samples, EcfConfig, SimulationSample};

fn main() -> efect::Result<()> {
    let model = lookup("oscillator_pair")?;
    let sample = model.spec.simulate(400, &model.default_times, 4)?;
    // a second "simulator" that carries a tiny numerical error
    let noisy = SimulationSample::from_flat(
        sample.variable_names().to_vec(),
        sample.times().to_vec(),
        sample.values().iter().map(|v| v * (1.0 + 1e-12)).collect(),
    )?;

    println!("x[0][5] = {} vs {}", sample.value(0, 0, 5), noisy.value(0, 0, 5));
    let raw = compare_samples(&sample, &noisy, EcfConfig::default())?.value();
    let a = sample.round_sigfigs(6)?;
    let b = noisy.round_sigfigs(6)?;
    let rounded = compare_samples(&a, &b, EcfConfig::default())?.value();
    println!("raw error {raw:.3e}, after rounding to 6 figures {rounded:.3e}");
    Ok(())
}
