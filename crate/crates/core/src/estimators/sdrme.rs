use crate::bregman::{GammaConfig, Generator, LinkPair, RatioSample};
use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::model::UnnormalizedModel;
use crate::numerics::weighted_log_sum_exp;
use crate::space::Dataset;

use super::optimizer::{minimize, FitConfig, FitResult};

/// Starting τ: the configured θ (or τ), else the model's initial θ, with
/// `c₀ = log (1/n) Σ p(x_i; θ₀)/η̂(x_i)` so that the initial ratios average 1.
pub(crate) fn initial_tau(
    model: &dyn UnnormalizedModel,
    rs: &RatioSample,
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    let d = model.dim_theta();
    let theta0 = match &cfg.initial {
        Some(v) if v.len() == d + 1 => return Ok(v.clone()),
        Some(v) if v.len() == d => v.clone(),
        Some(v) => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            })
        }
        None => model.initial_theta(cfg.seed),
    };
    let mut tau = vec![0.0];
    tau.extend_from_slice(&theta0);
    let lw = rs.log_ratios(model, &tau);
    tau[0] = weighted_log_sum_exp(&lw, rs.sample().weights()) - rs.n().ln();
    if !tau[0].is_finite() {
        return Err(Error::Domain(
            "model vanishes on the data at the initial θ".into(),
        ));
    }
    Ok(tau)
}

pub(crate) fn starting_theta(model: &dyn UnnormalizedModel, cfg: &FitConfig) -> Result<Vec<f64>> {
    let d = model.dim_theta();
    match &cfg.initial {
        Some(v) if v.len() == d => Ok(v.clone()),
        Some(v) => Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        }),
        None => Ok(model.initial_theta(cfg.seed)),
    }
}

/// Separable SDRME: minimizes `(1/n) Σ B_f{h₁(w_i), h₂(w_i)}` over
/// `τ = (c, θ)` of the extended model `e^{-c} p(x; θ)`.
pub fn fit_sdrme_separable(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    eta: &dyn DensityEstimate,
    f: &Generator,
    links: &LinkPair,
    cfg: &FitConfig,
) -> Result<FitResult> {
    fit_sdrme_separable_on(model, &RatioSample::new(data, eta)?, f, links, cfg)
}

/// [`fit_sdrme_separable`] averaging over a prepared [`RatioSample`], e.g.
/// one built from a regularized pmf's mixture measure.
pub fn fit_sdrme_separable_on(
    model: &dyn UnnormalizedModel,
    rs: &RatioSample,
    f: &Generator,
    links: &LinkPair,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let tau0 = initial_tau(model, rs, cfg)?;
    let mut objective = |tau: &[f64], g: &mut [f64]| rs.separable(model, tau, f, links, Some(g));
    minimize(&mut objective, &tau0, cfg, true)
}

/// ns-γ: minimizes the γ-divergence loss over θ alone.
pub fn fit_sdrme_gamma(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    eta: &dyn DensityEstimate,
    gamma: &GammaConfig,
    cfg: &FitConfig,
) -> Result<FitResult> {
    fit_sdrme_gamma_on(model, &RatioSample::new(data, eta)?, gamma, cfg)
}

pub fn fit_sdrme_gamma_on(
    model: &dyn UnnormalizedModel,
    rs: &RatioSample,
    gamma: &GammaConfig,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let theta0 = starting_theta(model, cfg)?;
    let mut objective = |theta: &[f64], g: &mut [f64]| rs.ns_gamma(model, theta, gamma, Some(g));
    minimize(&mut objective, &theta0, cfg, false)
}
