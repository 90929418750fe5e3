//! A small RBM replication study through the bench harness, printed as a
//! table. Pass a replication count to go bigger (the preset uses 20).
//!
//! cargo run --release --example rbm_table -- 5

use sdrme::bench::{render_summary, run_experiment, ExperimentSpec};

fn main() -> sdrme::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let mut spec = ExperimentSpec::preset("rbm").expect("built-in preset");
    spec.replications = reps;
    spec.sample_sizes = vec![1000];
    let out = run_experiment(&spec, None)?;
    print!("{}", render_summary(&out));
    Ok(())
}
