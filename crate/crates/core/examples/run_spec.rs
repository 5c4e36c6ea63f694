//! Loads a study from `examples/specs/<name>.json`, runs a few trials and writes
//! `records.csv` and `summary.json`.
//!
//! `cargo run --release --example run_spec -- covariance_scaling 10`

use std::path::Path;

use heavytail::bench::{run_experiment, write_outputs, ExperimentSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "covariance_scaling".into());
    let trials: usize = args.next().map(|t| t.parse()).transpose()?.unwrap_or(5);

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs").join(format!("{name}.json"));
    let mut spec: ExperimentSpec = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    spec.trials = trials;
    spec.validate()?;

    let outcome = run_experiment(&spec, None)?;
    println!("{} ({})", name, outcome.summary.metric);
    for est in &outcome.summary.estimators {
        println!(
            "  {:<14} median {:.4}  mean {:.4}  over {} trials",
            est.estimator,
            est.median.unwrap_or(f64::NAN),
            est.mean.unwrap_or(f64::NAN),
            est.count
        );
    }
    let out = std::env::temp_dir().join(format!("heavytail-{name}"));
    let (csv, json) = write_outputs(&outcome.records, &outcome.summary, &out)?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
