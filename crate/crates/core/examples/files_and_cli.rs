//! Sample and report files, and the same workflow through the `efect`
//! command line (driven in-process here).
//!
//! cargo run --release --example files_and_cli

use efect::cli;
use efect::read_sample;

fn main() -> efect::Result<()> {
    let dir = std::env::temp_dir().join("efect_cli_example");
    std::fs::create_dir_all(&dir).map_err(|source| efect::Error::Io { path: dir.clone(), source })?;
    let path = |name: &str| dir.join(name).display().to_string();
    let (sample, report) = (path("sample.json"), path("report.json"));

    let steps: Vec<Vec<&str>> = vec![
        vec!["efect", "grow", "--model", "sir", "--seed", "1", "--out", &sample, "--report", &report],
        vec!["efect", "verify", "--report", &report, "--sample", &sample, "--seed", "1"],
        vec!["efect", "verify", "--report", &report, "--model", "sir", "--seed", "2"],
    ];
    for args in steps {
        let mut out = Vec::new();
        let code = cli::run(&args, &mut out, &mut std::io::sink());
        println!("$ {}\nexit {code}\n{}", args[1..].join(" "), String::from_utf8_lossy(&out));
    }
    let s = read_sample(std::path::Path::new(&sample))?;
    println!("sample file holds {} runs of {:?}", s.run_count(), s.variable_names());
    Ok(())
}
