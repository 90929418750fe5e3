use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::efficient_se;
use crate::bregman::RatioSample;
use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::estimators::{
    fit_exact_mle, fit_mc_mle, fit_nce, fit_sdrme_gamma_on, fit_sdrme_separable_on, FitConfig,
    FitResult,
};
use crate::model::{model_space, ExtendedModel, UnnormalizedModel};
use crate::models::{
    misspecified_truth_pmf, rng_for, sample_gengamma, seed_stream, AuxiliaryDistribution,
    DiscreteDistribution, FlidModel, GenGammaModel, HalfNormal, PoissonModel, ProductBernoulli,
    RbmModel,
};
use crate::nonparam::{select_bandwidth_cv, EmpiricalPmf, KdeEstimate, RegularizedPmf};
use crate::space::Dataset;

use super::metrics::{exact_kl_discrete, scaled_mse};
use super::spec::{DensityPolicy, EstimatorKind, EstimatorSpec, ExperimentSpec, Metric, ModelSpec};

const TRUTH_STREAM: u64 = 0x7a07;
const DATA_STREAM: u64 = 0xda7a;
const REGULARIZE_STREAM: u64 = 0x4e61;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    InfiniteKl,
    Failed,
}

/// One estimator fitted to one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub estimator: String,
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    /// Fingerprint of the dataset; equal across estimators of a replication.
    pub data_hash: u64,
    pub status: TrialStatus,
    pub metric: Option<f64>,
    pub theta_hat: Vec<f64>,
    /// Efficient standard errors, for separable SDRME fits.
    pub standard_errors: Option<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub message: Option<String>,
}

/// Aggregate over replications for one `(estimator, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub estimator: String,
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub median_time_s: f64,
    pub ok: usize,
    pub infinite_kl: usize,
    pub failed: usize,
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub name: String,
    pub metric: Metric,
    pub replications: usize,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn row(&self, estimator: &str, n: usize) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.n == n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialResult>,
    pub summary: SummaryTable,
}

impl ExperimentOutput {
    pub fn any_failed(&self) -> bool {
        self.trials.iter().any(|t| t.status == TrialStatus::Failed)
    }

    /// Trials of one cell in replication order.
    pub fn cell(&self, estimator: &str, n: usize) -> Vec<&TrialResult> {
        self.trials
            .iter()
            .filter(|t| t.estimator == estimator && t.n == n)
            .collect()
    }
}

/// The per-replication truth: the parameter (when the family contains the
/// truth) and a sampler/pmf.
struct Truth {
    theta: Option<Vec<f64>>,
    pmf: Option<DiscreteDistribution>,
}

impl ModelSpec {
    /// The unnormalized family fitted under this spec.
    pub fn build(&self) -> Box<dyn UnnormalizedModel> {
        match *self {
            ModelSpec::Poisson { x_max, .. } | ModelSpec::PoissonMisspecified { x_max, .. } => {
                Box::new(PoissonModel::new(x_max))
            }
            ModelSpec::Gengamma { .. } => Box::new(GenGammaModel),
            ModelSpec::Rbm { d_v, d_h, .. } => Box::new(RbmModel::new(d_v, d_h)),
            ModelSpec::Flid { v, l } => Box::new(FlidModel::new(v, l)),
        }
    }
}

fn draw_truth(spec: &ModelSpec, model: &dyn UnnormalizedModel, seed: u64) -> Result<Truth> {
    let mut rng = rng_for(seed, TRUTH_STREAM);
    let theta = match *spec {
        ModelSpec::Poisson { theta, .. } => vec![theta],
        ModelSpec::PoissonMisspecified { x_max, .. } => {
            return Ok(Truth {
                theta: None,
                pmf: Some(misspecified_truth_pmf(x_max)?),
            })
        }
        ModelSpec::Gengamma { theta1, theta2 } => {
            return Ok(Truth {
                theta: Some(vec![theta1, theta2]),
                pmf: None,
            })
        }
        ModelSpec::Rbm { weight_range, .. } => (0..model.dim_theta())
            .map(|_| rng.random_range(-weight_range..=weight_range))
            .collect(),
        ModelSpec::Flid { .. } => (0..model.dim_theta())
            .map(|_| rng.random_range(0.0..1.0))
            .collect(),
    };
    let pmf = DiscreteDistribution::from_model(model, &theta)?;
    Ok(Truth {
        theta: Some(theta),
        pmf: Some(pmf),
    })
}

fn sample(spec: &ModelSpec, truth: &Truth, n: usize, seed: u64) -> Result<Dataset> {
    match (spec, &truth.pmf) {
        (ModelSpec::Gengamma { theta1, theta2 }, _) => sample_gengamma(*theta1, *theta2, n, seed),
        (_, Some(pmf)) => pmf.sample_n(n, &mut rng_for(seed, DATA_STREAM)),
        _ => Err(Error::config("model", "no sampler for this model")),
    }
}

/// Uniform over a finite range for Poisson, uniform over all spin vectors
/// for the RBM, moment-matched otherwise.
fn auxiliary(
    spec: &ModelSpec,
    model: &dyn UnnormalizedModel,
    data: &Dataset,
) -> Result<Box<dyn AuxiliaryDistribution>> {
    Ok(match *spec {
        ModelSpec::Poisson { aux_max, .. } | ModelSpec::PoissonMisspecified { aux_max, .. } => {
            Box::new(DiscreteDistribution::uniform(
                1,
                (0..=aux_max).map(|k| k as f64).collect(),
            )?)
        }
        ModelSpec::Gengamma { .. } => Box::new(HalfNormal::matched_to(data)?),
        ModelSpec::Rbm { .. } => {
            let mut points = Vec::new();
            model.for_each_point(&mut |x| points.extend_from_slice(x))?;
            Box::new(DiscreteDistribution::uniform(model.dim_x(), points)?)
        }
        ModelSpec::Flid { .. } => Box::new(ProductBernoulli::matched_to(data)?),
    })
}

/// The plug-in density and the sample the loss averages over: the data,
/// or for a regularized pmf its whole mixture measure.
fn density(
    policy: DensityPolicy,
    est: &EstimatorSpec,
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    seed: u64,
) -> Result<(Box<dyn DensityEstimate>, RatioSample)> {
    let eta: Box<dyn DensityEstimate> = match policy {
        DensityPolicy::Empirical => Box::new(EmpiricalPmf::new(data)),
        DensityPolicy::Regularized => {
            let space = model_space(model)?;
            let reg = RegularizedPmf::new(data, &space, &mut rng_for(seed, REGULARIZE_STREAM))?;
            let rs = RatioSample::weighted(reg.mixture_sample(data)?, &reg)?;
            return Ok((Box::new(reg), rs));
        }
        DensityPolicy::Kde => {
            let order = est.kernel_order.unwrap_or(6);
            let bw = select_bandwidth_cv(data, order, None)?;
            Box::new(KdeEstimate::new(data, bw, order)?)
        }
    };
    let rs = RatioSample::new(data, eta.as_ref())?;
    Ok((eta, rs))
}

/// A fitted estimator together with the plug-in density it used, if any.
pub struct PreparedFit {
    pub fit: FitResult,
    pub eta: Option<Box<dyn DensityEstimate>>,
}

/// Fits one estimator to `data`, building the plug-in density or auxiliary
/// distribution the estimator needs from the model spec's defaults.
pub fn prepare_fit(
    spec: &ModelSpec,
    est: &EstimatorSpec,
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    cfg: &FitConfig,
) -> Result<PreparedFit> {
    est.validate()?;
    let seed = cfg.seed;
    let (eta, rs) = if est.kind.uses_density() {
        let policy = est.density.unwrap_or(spec.default_density());
        let (eta, rs) = density(policy, est, model, data, seed)?;
        (Some(eta), Some(rs))
    } else {
        (None, None)
    };
    let fit = match (est.kind, &rs) {
        (
            EstimatorKind::SKl
            | EstimatorKind::SChi
            | EstimatorKind::SJs
            | EstimatorKind::Separable,
            Some(rs),
        ) => {
            let (f, links) = est.separable_parts()?;
            fit_sdrme_separable_on(model, rs, &f, &links, cfg)?
        }
        (EstimatorKind::NsGamma, Some(rs)) => {
            fit_sdrme_gamma_on(model, rs, &est.gamma_parts()?, cfg)?
        }
        (EstimatorKind::Nce | EstimatorKind::McMle, _) => {
            let aux = auxiliary(spec, model, data)?;
            let kappa = est.kappa_or_default();
            if est.kind == EstimatorKind::Nce {
                fit_nce(model, data, aux.as_ref(), kappa, cfg)?
            } else {
                fit_mc_mle(model, data, aux.as_ref(), kappa, cfg)?
            }
        }
        (EstimatorKind::Mle, _) => fit_exact_mle(model, data, cfg)?,
        _ => unreachable!("density-based estimators always get a ratio sample"),
    };
    Ok(PreparedFit { fit, eta })
}

/// Efficient standard errors for separable SDRME fits.
fn separable_se(
    kind: EstimatorKind,
    model: &dyn UnnormalizedModel,
    fit: &FitResult,
    data: &Dataset,
) -> Option<Vec<f64>> {
    let separable = matches!(
        kind,
        EstimatorKind::SKl | EstimatorKind::SChi | EstimatorKind::SJs | EstimatorKind::Separable
    );
    let tau = fit.tau().filter(|_| separable)?;
    efficient_se(&ExtendedModel::new(model), &tau, data).ok()
}

fn evaluate(
    metric: Metric,
    truth: &Truth,
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    n: usize,
) -> Result<f64> {
    match metric {
        Metric::ScaledKl => {
            let pmf = truth
                .pmf
                .as_ref()
                .ok_or_else(|| Error::config("metric", "truth has no pmf"))?;
            Ok(n as f64 * exact_kl_discrete(pmf, model, theta)?)
        }
        Metric::ScaledMse => {
            let star = truth
                .theta
                .as_ref()
                .ok_or_else(|| Error::config("metric", "no true parameter"))?;
            scaled_mse(theta, star, n)
        }
    }
}

fn run_cell(
    spec: &ExperimentSpec,
    model: &dyn UnnormalizedModel,
    rep: usize,
    size_idx: usize,
) -> Vec<TrialResult> {
    let n = spec.sample_sizes[size_idx];
    let seed = seed_stream(spec.seed, rep as u64, size_idx as u64);
    let truth_seed = seed_stream(spec.seed, rep as u64, u64::MAX);
    let prepared = draw_truth(&spec.model, model, truth_seed)
        .and_then(|truth| sample(&spec.model, &truth, n, seed).map(|data| (truth, data)));
    let (truth, data) = match prepared {
        Ok(v) => v,
        Err(e) => {
            return spec
                .estimators
                .iter()
                .map(|est| failed(est.label(), n, rep, seed, 0, &e, 0.0))
                .collect()
        }
    };
    let hash = data.fingerprint();
    let cfg = spec.fit.clone().with_seed(seed);
    spec.estimators
        .iter()
        .map(|est| {
            let start = Instant::now();
            let outcome = prepare_fit(&spec.model, est, model, &data, &cfg);
            let wall = start.elapsed().as_secs_f64();
            debug_assert_eq!(data.fingerprint(), hash);
            let fit = match outcome {
                Ok(p) => p.fit,
                Err(e) => return failed(est.label(), n, rep, seed, hash, &e, wall),
            };
            let theta = fit.theta().to_vec();
            let (status, metric, message) = match evaluate(spec.metric(), &truth, model, &theta, n)
            {
                Ok(v) => (TrialStatus::Ok, Some(v), None),
                Err(Error::InfiniteKl) => (
                    TrialStatus::InfiniteKl,
                    None,
                    Some(Error::InfiniteKl.to_string()),
                ),
                Err(e) => (TrialStatus::Failed, None, Some(e.to_string())),
            };
            TrialResult {
                estimator: est.label(),
                n,
                replication: rep,
                seed,
                data_hash: hash,
                status,
                metric,
                theta_hat: theta,
                standard_errors: separable_se(est.kind, model, &fit, &data),
                converged: fit.converged,
                iterations: fit.iterations,
                wall_time_s: wall,
                message,
            }
        })
        .collect()
}

fn failed(
    estimator: String,
    n: usize,
    rep: usize,
    seed: u64,
    hash: u64,
    e: &Error,
    wall: f64,
) -> TrialResult {
    TrialResult {
        estimator,
        n,
        replication: rep,
        seed,
        data_hash: hash,
        status: TrialStatus::Failed,
        metric: None,
        theta_hat: Vec::new(),
        standard_errors: None,
        converged: false,
        iterations: 0,
        wall_time_s: wall,
        message: Some(e.to_string()),
    }
}

fn summarize(spec: &ExperimentSpec, trials: &[TrialResult]) -> SummaryTable {
    let mut rows = Vec::new();
    for est in &spec.estimators {
        let label = est.label();
        for &n in &spec.sample_sizes {
            let cell: Vec<&TrialResult> = trials
                .iter()
                .filter(|t| t.estimator == label && t.n == n)
                .collect();
            let values: Vec<f64> = cell.iter().filter_map(|t| t.metric).collect();
            let mut times: Vec<f64> = cell.iter().map(|t| t.wall_time_s).collect();
            times.sort_by(f64::total_cmp);
            let (mean, sd) = mean_sd(&values);
            rows.push(SummaryRow {
                estimator: label.clone(),
                n,
                mean,
                sd,
                median_time_s: median(&times),
                ok: values.len(),
                infinite_kl: cell
                    .iter()
                    .filter(|t| t.status == TrialStatus::InfiniteKl)
                    .count(),
                failed: cell
                    .iter()
                    .filter(|t| t.status == TrialStatus::Failed)
                    .count(),
                not_converged: cell
                    .iter()
                    .filter(|t| t.status == TrialStatus::Ok && !t.converged)
                    .count(),
            });
        }
    }
    SummaryTable {
        name: spec.name.clone(),
        metric: spec.metric(),
        replications: spec.replications,
        rows,
    }
}

/// Mean and sample standard deviation (`n - 1` denominator).
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let sd = (values.len() >= 2)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt());
    (Some(mean), sd)
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        k if k % 2 == 1 => sorted[k / 2],
        k => 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]),
    }
}

/// Runs every `(replication, sample size)` cell on a pool of `jobs` threads
/// (all cores when `None`). Results do not depend on `jobs`.
pub fn run_experiment(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<ExperimentOutput> {
    spec.validate()?;
    let model = spec.model.build();
    let cells: Vec<(usize, usize)> = (0..spec.replications)
        .flat_map(|r| (0..spec.sample_sizes.len()).map(move |s| (r, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    let mut trials: Vec<TrialResult> = pool.install(|| {
        cells
            .par_iter()
            .flat_map_iter(|&(r, s)| run_cell(spec, model.as_ref(), r, s))
            .collect()
    });
    let order = |t: &TrialResult| {
        (
            spec.sample_sizes.iter().position(|&n| n == t.n),
            t.replication,
            spec.estimators
                .iter()
                .position(|e| e.label() == t.estimator),
        )
    };
    trials.sort_by_key(order);
    let summary = summarize(spec, &trials);
    Ok(ExperimentOutput {
        spec: spec.clone(),
        trials,
        summary,
    })
}
