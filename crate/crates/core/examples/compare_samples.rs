//! EFECT error between pairs of samples: two seeds of the same model stay
//! close, a structurally different model sits near the maximum of 2.
//!
//! cargo run --release --example compare_samples

use efect::harness::lookup;
use efect::{compare_samples_detailed, EcfConfig};

fn main() -> efect::Result<()> {
    let sir = lookup("sir")?;
    let constant = lookup("constant")?;
    let times = &sir.default_times;

    let a = sir.spec.simulate(2000, times, 1)?;
    let b = sir.spec.simulate(2000, times, 2)?;
    let c = constant.spec.simulate(2000, times, 3)?;

    for (label, x, y) in [("sir vs sir (new seed)", &a, &b), ("sir vs constant", &a, &c)] {
        let cmp = compare_samples_detailed(x, y, EcfConfig::default())?;
        println!("{label}: {:.4}", cmp.delta.value());
        for (name, d) in a.variable_names().iter().zip(&cmp.per_variable) {
            println!("    {name}: {d:.4}");
        }
    }
    Ok(())
}
