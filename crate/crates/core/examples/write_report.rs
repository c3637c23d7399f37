//! Package an accepted sample as a report: error statistics, ECFs of one
//! half, grid maxima, input distributions and significant figures.
//!
//! cargo run --release --example write_report [path]

use std::path::PathBuf;

use efect::harness::lookup;
use efect::{build_report, read_report, sample_error_distribution, write_report, ReproConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sir_report.json"));
    let model = lookup("sir")?;
    let config = ReproConfig::default();

    let sample = model.spec.simulate(12_000, &model.default_times, 1)?.round_sigfigs(6)?;
    let stats = sample_error_distribution(&sample, &config, &mut ChaCha8Rng::seed_from_u64(2))?;
    let report = build_report(
        &sample,
        &stats,
        config.ecf,
        model.spec.input_sampling(),
        6,
        &mut ChaCha8Rng::seed_from_u64(3),
    )?;
    write_report(&report, &path)?;

    let back = read_report(&path)?;
    assert_eq!(back, report);
    println!("wrote {}", path.display());
    println!(
        "{} runs, error {:.4} +/- {:.4}, {} ECF records of {} points",
        back.sample_size,
        back.error_mean,
        back.error_stdev,
        back.ecf.len(),
        back.ecf_num_points
    );
    Ok(())
}
