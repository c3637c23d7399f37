//! Estimate the sample size needed for the convergence point from a few
//! small self-tests, by fitting `mean + 3 stdev = a n^b` in log-log space.
//!
//! cargo run --release --example power_law_sizing

use efect::harness::lookup;
use efect::{estimate_required_size, fit_power_law, sample_error_distribution, ReproConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    let model = lookup("sir")?;
    let config = ReproConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut points = Vec::new();
    for n in [100, 200, 400, 800] {
        let sample = model.spec.simulate(n, &model.default_times, 5)?;
        let stats = sample_error_distribution(&sample, &config, &mut rng)?;
        let upper = stats.upper_statistic(config.target_multiplier);
        println!("n = {n:>4}: mean + 3 stdev = {upper:.4}");
        points.push((n, upper));
    }
    let fit = fit_power_law(&points)?;
    println!("fit: {:.3} n^{:.3} (r^2 = {:.4})", fit.coefficient, fit.exponent, fit.r_squared);
    for target in [0.1, config.target_threshold, 0.05] {
        println!("target {target}: about {} runs", estimate_required_size(&fit, target)?);
    }
    Ok(())
}
