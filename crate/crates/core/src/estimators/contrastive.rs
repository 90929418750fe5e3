use crate::error::{Error, Result};
use crate::model::{ExtendedModel, UnnormalizedModel};
use crate::models::{rng_for, AuxiliaryDistribution};
use crate::numerics::{log_sum_exp, sigmoid, softplus, weighted_log_sum_exp, weighted_softmax};
use crate::space::{Dataset, WeightedSample};

use super::optimizer::{minimize, FitConfig, FitResult};
use super::sdrme::starting_theta;

/// Stream reserved for auxiliary draws, so they never overlap data draws
/// made from the same seed.
const AUX_STREAM: u64 = 0xa0c5;

/// Distinct points with multiplicities and `log a(x)` at each.
struct AuxWeighted {
    sample: WeightedSample,
    log_a: Vec<f64>,
}

impl AuxWeighted {
    fn new(data: &Dataset, aux: &dyn AuxiliaryDistribution) -> Result<Self> {
        let sample = data.compress();
        let log_a: Vec<f64> = sample.iter().map(|(x, _)| aux.log_density(x)).collect();
        if log_a.iter().any(|v| !v.is_finite()) {
            return Err(Error::SupportViolation);
        }
        Ok(AuxWeighted { sample, log_a })
    }

    fn log_r(&self, model: &dyn UnnormalizedModel, tau: &[f64]) -> Vec<f64> {
        let ext = ExtendedModel::new(model);
        self.sample
            .iter()
            .zip(&self.log_a)
            .map(|((x, _), la)| ext.log_q(x, tau) - la)
            .collect()
    }
}

/// `ceil(κ n)` draws from the auxiliary distribution on the seed's
/// auxiliary stream.
pub fn draw_auxiliary(
    aux: &dyn AuxiliaryDistribution,
    n: usize,
    kappa: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::config("kappa", "must be positive"));
    }
    let m = ((kappa * n as f64).ceil() as usize).max(1);
    let mut rng = rng_for(seed, AUX_STREAM);
    aux.sample(m, &mut rng)
}

/// NCE over τ with `κ n` auxiliary draws:
/// `-(1/n) Σ_i log(r_i/(r_i+κ)) - (1/n) Σ_j log(κ/(r_j+κ))`, `r = q/a`.
pub fn fit_nce(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    aux: &dyn AuxiliaryDistribution,
    kappa: f64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let noise = draw_auxiliary(aux, data.n(), kappa, cfg.seed)?;
    let xs = AuxWeighted::new(data, aux)?;
    let ys = AuxWeighted::new(&noise, aux)?;
    let n = data.n() as f64;
    let log_kappa = kappa.ln();

    let d = model.dim_theta();
    let tau0 = match &cfg.initial {
        Some(v) if v.len() == d + 1 => v.clone(),
        _ => {
            let theta0 = starting_theta(model, cfg)?;
            let mut tau = vec![0.0];
            tau.extend_from_slice(&theta0);
            // Importance estimate of log Z(θ₀).
            tau[0] = weighted_log_sum_exp(&ys.log_r(model, &tau), ys.sample.weights())
                - ys.sample.total().ln();
            tau
        }
    };

    let ext = ExtendedModel::new(model);
    let mut score = vec![0.0; d + 1];
    let mut objective = |tau: &[f64], g: &mut [f64]| -> Result<f64> {
        Ok(nce_eval(&ext, &xs, &ys, log_kappa, n, tau, g, &mut score))
    };
    minimize(&mut objective, &tau0, cfg, true)
}

#[allow(clippy::too_many_arguments)]
fn nce_eval(
    ext: &ExtendedModel<'_>,
    xs: &AuxWeighted,
    ys: &AuxWeighted,
    log_kappa: f64,
    n: f64,
    tau: &[f64],
    g: &mut [f64],
    score: &mut [f64],
) -> f64 {
    g.fill(0.0);
    let mut total = 0.0;
    for (set, data_side) in [(xs, true), (ys, false)] {
        for ((x, m), la) in set.sample.iter().zip(&set.log_a) {
            let z = ext.log_q(x, tau) - la - log_kappa;
            // data: softplus(-z); noise: softplus(z)
            let (loss, slope) = if data_side {
                (softplus(-z), -sigmoid(-z))
            } else {
                (softplus(z), sigmoid(z))
            };
            total += m * loss;
            ext.grad_tau_log_q(x, tau, score);
            for (gj, sj) in g.iter_mut().zip(score.iter()) {
                *gj += m * slope * sj;
            }
        }
    }
    g.iter_mut().for_each(|v| *v /= n);
    total / n
}

/// NCE loss and its τ-gradient for fixed auxiliary draws `noise`.
#[allow(clippy::too_many_arguments)]
pub fn nce_loss(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    noise: &Dataset,
    aux: &dyn AuxiliaryDistribution,
    kappa: f64,
    tau: &[f64],
    grad: &mut [f64],
) -> Result<f64> {
    let xs = AuxWeighted::new(data, aux)?;
    let ys = AuxWeighted::new(noise, aux)?;
    let mut score = vec![0.0; tau.len()];
    Ok(nce_eval(
        &ExtendedModel::new(model),
        &xs,
        &ys,
        kappa.ln(),
        data.n() as f64,
        tau,
        grad,
        &mut score,
    ))
}

/// Profiled Monte Carlo MLE loss and its θ-gradient for fixed auxiliary
/// draws `noise`.
pub fn mc_mle_loss(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    noise: &Dataset,
    aux: &dyn AuxiliaryDistribution,
    theta: &[f64],
    grad: &mut [f64],
) -> Result<f64> {
    let ys = AuxWeighted::new(noise, aux)?;
    let mut score = vec![0.0; theta.len()];
    let mut soft = vec![0.0; ys.sample.len()];
    Ok(mc_mle_eval(
        model,
        &data.compress(),
        &ys,
        theta,
        grad,
        &mut score,
        &mut soft,
    ))
}

fn mc_mle_eval(
    model: &dyn UnnormalizedModel,
    xs: &WeightedSample,
    ys: &AuxWeighted,
    theta: &[f64],
    g: &mut [f64],
    score: &mut [f64],
    soft: &mut [f64],
) -> f64 {
    let n = xs.total();
    g.fill(0.0);
    let mut data_term = 0.0;
    for (x, m) in xs.iter() {
        data_term += m * model.log_p(x, theta);
        model.grad_log_p(x, theta, score);
        for (gj, sj) in g.iter_mut().zip(score.iter()) {
            *gj -= m * sj / n;
        }
    }
    let lr: Vec<f64> = ys
        .sample
        .iter()
        .zip(&ys.log_a)
        .map(|((y, _), la)| model.log_p(y, theta) - la)
        .collect();
    let lse = weighted_softmax(&lr, ys.sample.weights(), soft);
    for ((y, _), s) in ys.sample.iter().zip(soft.iter()) {
        model.grad_log_p(y, theta, score);
        for (gj, sj) in g.iter_mut().zip(score.iter()) {
            *gj += s * sj;
        }
    }
    -data_term / n + lse - ys.sample.total().ln()
}

/// Monte Carlo MLE with `c` profiled out:
/// `-(1/n) Σ log p(x_i; θ) + log (1/m) Σ_j p(y_j; θ)/a(y_j)`.
pub fn fit_mc_mle(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    aux: &dyn AuxiliaryDistribution,
    kappa: f64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let noise = draw_auxiliary(aux, data.n(), kappa, cfg.seed)?;
    AuxWeighted::new(data, aux)?;
    let ys = AuxWeighted::new(&noise, aux)?;
    let xs = data.compress();
    let theta0 = starting_theta(model, cfg)?;
    let d = model.dim_theta();
    let mut score = vec![0.0; d];
    let mut soft = vec![0.0; ys.sample.len()];
    let mut objective = |theta: &[f64], g: &mut [f64]| -> Result<f64> {
        Ok(mc_mle_eval(
            model, &xs, &ys, theta, g, &mut score, &mut soft,
        ))
    };
    minimize(&mut objective, &theta0, cfg, false)
}

/// Monte Carlo MLE before profiling, over τ:
/// `-(1/n) Σ log r(x_i) + (1/m) Σ_j r(y_j)`, `r = q/a`. Its θ-minimizer is
/// that of [`fit_mc_mle`] on the same auxiliary draws.
pub fn fit_mc_mle_joint(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    aux: &dyn AuxiliaryDistribution,
    kappa: f64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let noise = draw_auxiliary(aux, data.n(), kappa, cfg.seed)?;
    let xs = AuxWeighted::new(data, aux)?;
    let ys = AuxWeighted::new(&noise, aux)?;
    let n = data.n() as f64;
    let m_total = ys.sample.total();
    let d = model.dim_theta();
    let tau0 = match &cfg.initial {
        Some(v) if v.len() == d + 1 => v.clone(),
        _ => {
            let mut tau = vec![0.0];
            tau.extend(starting_theta(model, cfg)?);
            tau[0] = log_sum_exp(&ys.log_r(model, &tau)) - m_total.ln();
            tau
        }
    };
    let ext = ExtendedModel::new(model);
    let mut score = vec![0.0; d + 1];
    let mut objective = |tau: &[f64], g: &mut [f64]| -> Result<f64> {
        g.fill(0.0);
        let mut total = 0.0;
        for (((x, m), la), _) in xs.sample.iter().zip(&xs.log_a).zip(0..) {
            total -= m * (ext.log_q(x, tau) - la) / n;
            ext.grad_tau_log_q(x, tau, &mut score);
            for (gj, sj) in g.iter_mut().zip(&score) {
                *gj -= m * sj / n;
            }
        }
        for ((y, m), la) in ys.sample.iter().zip(&ys.log_a) {
            let r = (ext.log_q(y, tau) - la).exp();
            total += m * r / m_total;
            ext.grad_tau_log_q(y, tau, &mut score);
            for (gj, sj) in g.iter_mut().zip(&score) {
                *gj += m * r * sj / m_total;
            }
        }
        Ok(total)
    };
    minimize(&mut objective, &tau0, cfg, true)
}
