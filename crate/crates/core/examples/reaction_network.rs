//! Build a small reaction network by hand, simulate it with the Gillespie
//! direct method and test how reproducible the result is.
//!
//! cargo run --release --example reaction_network

use efect::harness::{simulate_ssa, Reaction, ReactionNetworkSpec};
use efect::{sample_error_distribution, ReproConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> efect::Result<()> {
    // dimerisation: 2A -> B, B -> 2A
    let network = ReactionNetworkSpec {
        species: vec![("A".into(), 100), ("B".into(), 0)],
        reactions: vec![
            Reaction { name: "bind".into(), rate: 0.005, reactants: vec![(0, 2)], products: vec![(1, 1)] },
            Reaction { name: "split".into(), rate: 0.2, reactants: vec![(1, 1)], products: vec![(0, 2)] },
        ],
    };
    let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
    let sample = simulate_ssa(&network, 4000, &times, 8)?;
    let last = sample.column(1, times.len() - 1);
    println!("mean B at t = 10: {:.2}", last.iter().sum::<f64>() / last.len() as f64);

    let stats = sample_error_distribution(&sample, &ReproConfig::default(), &mut ChaCha8Rng::seed_from_u64(9))?;
    println!("self-test: mean {:.4}, stdev {:.4} over {} splits", stats.mean, stats.stdev, stats.count);
    Ok(())
}
