//! The modeler's self-test: split a sample into random halves until the
//! mean EFECT error settles, then check the convergence point
//! (mean + 3 stdev below 0.075) at a few sample sizes.
//!
//! cargo run --release --example reproducibility_test

use efect::harness::lookup;
use efect::{meets_convergence_point, sample_error_distribution, ReproConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    let sir = lookup("sir")?;
    let config = ReproConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("{:>7} {:>9} {:>9} {:>6}  accepted", "size", "mean", "stdev", "evals");
    for n in [200, 2000, 20_000] {
        let sample = sir.spec.simulate(n, &sir.default_times, 11)?;
        let stats = sample_error_distribution(&sample, &config, &mut rng)?;
        println!(
            "{n:>7} {:>9.5} {:>9.5} {:>6}  {}",
            stats.mean,
            stats.stdev,
            stats.count,
            meets_convergence_point(&stats, &config)
        );
    }
    Ok(())
}
