//! Evaluate the empirical characteristic function of normal draws and
//! compare it with the exact one, `exp(iμτ - σ²τ²/2)`.
//!
//! cargo run --example ecf_basics

use efect::{evaluate_ecf, tau_max};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let (mu, sigma) = (2.0, 0.5);
    let normal = Normal::new(mu, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();

    // default grid: 100 points over three periods of the spread
    let top = tau_max(sigma, 3.0);
    let taus: Vec<f64> = (0..100).map(|j| j as f64 * top / 99.0).collect();
    let ecf = evaluate_ecf(&draws, &taus).unwrap();

    let mut worst: f64 = 0.0;
    for (tau, phi) in taus.iter().zip(&ecf) {
        let exact = Complex64::new(-0.5 * sigma * sigma * tau * tau, mu * tau).exp();
        worst = worst.max((phi - exact).norm());
    }
    println!("tau_max = {top:.4}");
    for j in [0, 10, 25, 50, 99] {
        println!("phi({:7.4}) = {:+.5} {:+.5}i", taus[j], ecf[j].re, ecf[j].im);
    }
    println!("largest distance from the exact CF: {worst:.5}");
}
