//! The curator's side: regenerate a sample of the reported size with a new
//! seed, round it like the report, and test it against the report. A
//! curator using the wrong infection-rate distribution is also checked.
//!
//! cargo run --release --example curator_verify

use efect::harness::lookup;
use efect::{build_report, sample_error_distribution, verify_report, ReproConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    let model = lookup("sir")?;
    let times = &model.default_times;
    let config = ReproConfig::default();

    // modeler
    let sample = model.spec.simulate(12_000, times, 1)?.round_sigfigs(6)?;
    let stats = sample_error_distribution(&sample, &config, &mut ChaCha8Rng::seed_from_u64(2))?;
    let report = build_report(&sample, &stats, config.ecf, model.spec.input_sampling(), 6, &mut ChaCha8Rng::seed_from_u64(3))?;

    // curators
    let mut wrong = model.spec.clone();
    wrong.scale_input("beta", 1.25)?;
    for (label, spec) in [("same model", &model.spec), ("beta x 1.25", &wrong)] {
        let mine = spec.simulate(report.sample_size, times, 99)?.round_sigfigs(report.significant_figures)?;
        let v = verify_report(&report, &mine, 0.05, &config, &mut ChaCha8Rng::seed_from_u64(4))?;
        println!(
            "{label}: delta_xy {:.4}, p {:.4} -> {}",
            v.delta_xy,
            v.p_value,
            if v.reproduced { "reproduced" } else { "not reproduced" }
        );
    }
    Ok(())
}
