//! How large a change in an input distribution can a sample of a given size
//! detect? For each size and scaling factor:
//!
//! 1. simulate a sample,
//! 2. run the self-test on it,
//! 3. keep a random half (what a report would hold),
//! 4. simulate a half-size sample with the input distribution scaled,
//! 5. compare the two halves and score the error against the self-test.
//!
//! cargo run --release --example detect_parameter_change

use efect::harness::lookup;
use efect::sample::split_indices;
use efect::verify::reproduction_pvalue;
use efect::{compare_samples, sample_error_distribution, EcfConfig, EcfGrid, ReproConfig};
use efect::{efect_error, evaluate_ecf_set};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    let model = lookup("sir")?;
    let times = &model.default_times;
    let config = ReproConfig { min_evals: 40, ..ReproConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    println!("{:>6} {:>7} {:>9} {:>8}", "size", "scale", "delta", "p");
    for n in [1000, 4000, 10_000] {
        let sample = model.spec.simulate(n, times, 1)?;
        let stats = sample_error_distribution(&sample, &config, &mut rng)?;
        let (half, _) = split_indices(n, &mut rng)?;
        let reported = sample.select(&half);
        let grid = EcfGrid::for_sample(&sample, EcfConfig::default())?;
        let reported_ecf = evaluate_ecf_set(&reported, &grid)?;

        for scale in [1.0, 1.05, 1.25] {
            let mut spec = model.spec.clone();
            spec.scale_input("beta", scale)?;
            let other = spec.simulate(n / 2, times, 1000 + n as u64)?;
            let delta = efect_error(&evaluate_ecf_set(&other, &grid)?, &reported_ecf)?.value();
            let p = reproduction_pvalue(&stats, delta)?;
            println!("{n:>6} {scale:>7.2} {delta:>9.4} {p:>8.4}");
        }
    }
    // the pooled-grid comparison gives the same picture without a report
    let a = model.spec.simulate(2000, times, 2)?;
    let mut wider = model.spec.clone();
    wider.scale_input("beta", 1.25)?;
    let b = wider.simulate(2000, times, 3)?;
    println!("pooled comparison at 2000 runs, beta x 1.25: {:.4}", compare_samples(&a, &b, EcfConfig::default())?.value());
    Ok(())
}
