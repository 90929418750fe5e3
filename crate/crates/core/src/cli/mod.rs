//! The `sdrme` command line: `run` experiments from manifests, `certify`
//! generators and `fit` a single data file.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 some trial
//! failed (results are still written), 3 generator not certified.

mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::{efficient_report, sandwich_misspecified};
use crate::bench::{render_summary, run_experiment, write_outputs, EstimatorKind};
use crate::bregman::{certify_convexity, default_certification_grid, Certificate, Generator};
use crate::error::{Error, Result};
use crate::model::ExtendedModel;
use crate::space::Dataset;

pub use manifest::{apply_override, load_manifest, FitJob, Manifest, VarianceChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_TRIAL_FAILED: i32 = 2;
pub const EXIT_NOT_CERTIFIED: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SDRME_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "sdrme",
    version,
    about = "Self density-ratio matching estimators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment from a manifest or a preset.
    Run(RunArgs),
    /// Check the convexity condition of a generator (kl, chi, js).
    Certify { generator: String },
    /// Fit one estimator to a data file.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub manifest: Option<PathBuf>,
    /// Built-in experiment: poisson, poisson-misspecified, gengamma, rbm, flid.
    #[arg(long)]
    pub preset: Option<String>,
    /// `key=value` override of a manifest entry (dotted paths allowed;
    /// `n=1000` sets a single sample size).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// One sample per line, comma-separated coordinates.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// poisson, gengamma, rbm or flid.
    #[arg(long)]
    pub model: Option<String>,
    /// s-kl, s-chi, s-js, separable, ns-gamma, nce, mc-mle or mle.
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// empirical, regularized or kde.
    #[arg(long)]
    pub density: Option<String>,
    #[arg(long)]
    pub kernel_order: Option<u8>,
    /// efficient or sandwich.
    #[arg(long)]
    pub variance: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Certify { generator } => cmd_certify(&generator),
        Command::Fit(a) => cmd_fit(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn out_dir(flag: Option<&Path>, manifest: Option<&Path>) -> PathBuf {
    flag.or(manifest)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sdrme-out"))
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let manifest = match (&args.manifest, &args.preset) {
        (Some(path), _) => load_manifest(path, &args.overrides)?,
        (None, Some(name)) => Manifest::from_preset(name, &args.overrides)?,
        (None, None) => {
            return Err(Error::config(
                "manifest",
                "either --manifest or --preset is required",
            ))
        }
    };
    let spec = manifest
        .experiment
        .ok_or_else(|| Error::config("experiment", "manifest has no [experiment] section"))?;
    let output = run_experiment(&spec, args.jobs)?;
    let dir = out_dir(args.out.as_deref(), manifest.out_dir.as_deref());
    let (csv, json) = write_outputs(&output, &dir)?;
    print!("{}", render_summary(&output));
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(if output.any_failed() {
        eprintln!("some trials failed; see the status column");
        EXIT_TRIAL_FAILED
    } else {
        EXIT_OK
    })
}

pub fn cmd_certify(name: &str) -> Result<i32> {
    let f = Generator::by_name(name)
        .ok_or_else(|| Error::config("generator", format!("unknown generator `{name}`")))?;
    let cert = certify_convexity(&f, &default_certification_grid());
    println!("{}: {cert}", f.name());
    Ok(match cert {
        Certificate::Convex => EXIT_OK,
        Certificate::NotCertified { .. } => EXIT_NOT_CERTIFIED,
    })
}

/// Reads one sample per line; blank lines are skipped.
pub fn read_data_file(path: &Path, dim: usize) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config(format!("data line {}", i + 1), e.to_string()))?;
        if row.len() != dim {
            return Err(Error::config(
                format!("data line {}", i + 1),
                format!("expected {dim} coordinates, got {}", row.len()),
            ));
        }
        values.extend(row);
    }
    Dataset::new(dim, values)
}

#[derive(Serialize)]
struct FitReport<'a> {
    schema_version: u32,
    effective_config: &'a FitJob,
    n: usize,
    theta_hat: &'a [f64],
    c_hat: Option<f64>,
    standard_errors: Option<Vec<f64>>,
    loss: f64,
    grad_norm: f64,
    converged: bool,
    iterations: usize,
}

pub fn cmd_fit(args: &FitArgs) -> Result<i32> {
    let job = FitJob::from_args(args)?;
    let model = job.model.build();
    let data = read_data_file(&job.data, model.dim_x())?;
    let cfg = job.fit.clone();
    let prepared =
        crate::bench::prepare_fit(&job.model, &job.estimator, model.as_ref(), &data, &cfg)?;
    let fit = prepared.fit;
    let standard_errors = match (fit.tau(), job.variance) {
        (None, _) => None,
        (Some(tau), VarianceChoice::Efficient) => Some(
            efficient_report(&ExtendedModel::new(model.as_ref()), &tau, &data)?.standard_errors,
        ),
        (Some(tau), VarianceChoice::Sandwich) => {
            if job.estimator.kind != EstimatorKind::SKl {
                return Err(Error::config(
                    "variance",
                    "sandwich standard errors are available for s-kl only",
                ));
            }
            let eta = prepared
                .eta
                .as_deref()
                .ok_or_else(|| Error::config("variance", "no density estimate"))?;
            Some(
                sandwich_misspecified(&ExtendedModel::new(model.as_ref()), &tau, &data, eta)?
                    .standard_errors,
            )
        }
    };
    println!("estimator  {}", job.estimator.label());
    println!("n          {}", data.n());
    for (j, t) in fit.theta().iter().enumerate() {
        match &standard_errors {
            Some(se) => println!("theta[{j}]   {t:.8}  (se {:.6})", se[j]),
            None => println!("theta[{j}]   {t:.8}"),
        }
    }
    println!("loss       {:.10}", fit.loss);
    println!(
        "converged  {} after {} iterations",
        fit.converged, fit.iterations
    );
    let report = FitReport {
        schema_version: crate::bench::SCHEMA_VERSION,
        effective_config: &job,
        n: data.n(),
        theta_hat: fit.theta(),
        c_hat: fit.c(),
        standard_errors,
        loss: fit.loss,
        grad_norm: fit.grad_norm,
        converged: fit.converged,
        iterations: fit.iterations,
    };
    let dir = out_dir(args.out.as_deref(), job.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("fit.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?,
    )?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}
