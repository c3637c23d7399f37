//! Grow a sample until it is reproducible. Runs are generated on demand
//! and reused as the sample grows.
//!
//! cargo run --release --example grow_sample

use efect::harness::lookup;
use efect::{grow_to_convergence, GrowthConfig, ReproConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    let model = lookup("seir_ssa")?;
    let times = model.default_times.clone();
    let outcome = grow_to_convergence(
        |first, count| model.spec.simulate_range(first, count, &times, 21),
        &ReproConfig::default(),
        &GrowthConfig::default(),
        &mut ChaCha8Rng::seed_from_u64(22),
    )?;
    for h in &outcome.history {
        println!(
            "{:>7} runs: mean {:.4} stdev {:.4} ({} evaluations)",
            h.size, h.stats.mean, h.stats.stdev, h.stats.count
        );
    }
    println!("accepted {} runs", outcome.sample.run_count());
    Ok(())
}
