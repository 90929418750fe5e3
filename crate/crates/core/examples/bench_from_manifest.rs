//! Load a TOML manifest, run the study and write the CSV and JSON files,
//! the same path `sdrme run` takes.
//!
//! cargo run --release --example bench_from_manifest -- manifests/poisson.toml n=1000

use std::path::PathBuf;

use sdrme::bench::{render_summary, run_experiment, write_outputs};
use sdrme::cli::load_manifest;

fn main() -> sdrme::Result<()> {
    let mut args = std::env::args().skip(1);
    let path =
        PathBuf::from(args.next().unwrap_or_else(|| {
            concat!(env!("CARGO_MANIFEST_DIR"), "/manifests/poisson.toml").into()
        }));
    let overrides: Vec<String> = args.collect();
    let manifest = load_manifest(&path, &overrides)?;
    let spec = manifest.experiment.expect("an [experiment] manifest");
    let out = run_experiment(&spec, None)?;
    print!("{}", render_summary(&out));
    let dir = manifest.out_dir.unwrap_or_else(|| "sdrme-out".into());
    let (csv, json) = write_outputs(&out, &dir)?;
    println!("{}\n{}", csv.display(), json.display());
    Ok(())
}
