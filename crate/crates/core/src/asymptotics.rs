//! Plug-in variance estimates: the information matrix `Ω̂`, efficient
//! standard errors, the misspecification sandwich and the ns-γ moment
//! diagnostic.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bregman::GammaConfig;
use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::model::{ExtendedModel, Tau, UnnormalizedModel};
use crate::space::Dataset;

/// Largest condition number accepted before a matrix is called singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarianceKind {
    WellSpecified,
    Sandwich,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    /// `Ω̂` (well specified) or `Ω̂₁ₘ` (sandwich), over `τ = (c, θ)`.
    pub omega_hat: DMatrix<f64>,
    /// Asymptotic covariance of `√n (τ̂ - τ*)`.
    pub covariance: DMatrix<f64>,
    /// θ-block of [`Self::covariance`].
    pub theta_block_inverse: DMatrix<f64>,
    /// `sqrt(diag(θ-block) / n)`.
    pub standard_errors: Vec<f64>,
    pub kind: VarianceKind,
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Inverse by full-pivot LU, refused above [`CONDITION_LIMIT`].
pub fn guarded_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let condition = condition_number(m);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularOmega { condition });
    }
    m.clone()
        .full_piv_lu()
        .try_inverse()
        .ok_or(Error::SingularOmega { condition })
}

fn scores(model: &dyn UnnormalizedModel, tau: &[f64], data: &Dataset) -> Vec<Vec<f64>> {
    let ext = ExtendedModel::new(model);
    data.points()
        .map(|x| {
            let mut g = vec![0.0; tau.len()];
            ext.grad_tau_log_q(x, tau, &mut g);
            g
        })
        .collect()
}

fn outer_mean(rows: &[Vec<f64>], weights: Option<&[f64]>) -> DMatrix<f64> {
    let m = rows[0].len();
    let n = rows.len() as f64;
    let mut out = DMatrix::zeros(m, m);
    for (k, g) in rows.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[k]);
        for i in 0..m {
            for j in 0..=i {
                out[(i, j)] += w * g[i] * g[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            out[(j, i)] = out[(i, j)];
        }
    }
    out / n
}

fn theta_block(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows() - 1;
    m.view((1, 1), (d, d)).into_owned()
}

fn standard_errors(block: &DMatrix<f64>, n: usize) -> Vec<f64> {
    (0..block.nrows())
        .map(|i| (block[(i, i)] / n as f64).sqrt())
        .collect()
}

/// `Ω̂ = (1/n) Σ ∇_τ log q(x_i; τ̂) ∇_τ log q(x_i; τ̂)ᵀ`.
pub fn omega_plug_in(
    model: &ExtendedModel<'_>,
    tau_hat: &Tau,
    data: &Dataset,
) -> Result<DMatrix<f64>> {
    let omega = outer_mean(&scores(model.base, &tau_hat.to_vec(), data), None);
    let condition = condition_number(&omega);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularOmega { condition });
    }
    Ok(omega)
}

/// Well-specified report built from `Ω̂⁻¹`.
pub fn efficient_report(
    model: &ExtendedModel<'_>,
    tau_hat: &Tau,
    data: &Dataset,
) -> Result<VarianceReport> {
    let omega = omega_plug_in(model, tau_hat, data)?;
    let covariance = guarded_inverse(&omega)?;
    let block = theta_block(&covariance);
    Ok(VarianceReport {
        standard_errors: standard_errors(&block, data.n()),
        omega_hat: omega,
        covariance,
        theta_block_inverse: block,
        kind: VarianceKind::WellSpecified,
    })
}

/// Efficient standard errors of θ̂: `sqrt(diag([Ω̂⁻¹]_θθ) / n)`.
pub fn efficient_se(model: &ExtendedModel<'_>, tau_hat: &Tau, data: &Dataset) -> Result<Vec<f64>> {
    Ok(efficient_report(model, tau_hat, data)?.standard_errors)
}

/// Sandwich `Ω̂₁ₘ⁻¹ Ω̂₂ₘ Ω̂₁ₘ⁻¹` for the s-KL estimator, with
/// `Ω̂₁ₘ = -(1/n) Σ (1 - w_i) ∇² log q_i + (1/n) Σ w_i ∇log q_i ∇log q_iᵀ`
/// and `Ω̂₂ₘ` the covariance of `∇_τ log q`.
pub fn sandwich_misspecified(
    model: &ExtendedModel<'_>,
    tau_hat: &Tau,
    data: &Dataset,
    eta: &dyn DensityEstimate,
) -> Result<VarianceReport> {
    let tau = tau_hat.to_vec();
    let m = tau.len();
    let n = data.n() as f64;
    let g = scores(model.base, &tau, data);
    let w: Vec<f64> = data
        .points()
        .map(|x| {
            let le = eta.log_eval(x);
            if !le.is_finite() {
                return Err(Error::NonpositiveDensity { value: eta.eval(x) });
            }
            Ok((model.log_q(x, &tau) - le).exp())
        })
        .collect::<Result<_>>()?;

    let mut omega1 = outer_mean(&g, Some(&w));
    for (x, wi) in data.points().zip(&w) {
        if *wi == 1.0 {
            continue;
        }
        let h = model.hess_tau_log_q(x, &tau);
        for i in 0..m {
            for j in 0..m {
                omega1[(i, j)] -= (1.0 - wi) * h[i * m + j] / n;
            }
        }
    }
    let mean: Vec<f64> = (0..m)
        .map(|j| g.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let centred: Vec<Vec<f64>> = g
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    let omega2 = outer_mean(&centred, None);
    let inv = guarded_inverse(&omega1)?;
    let covariance = &inv * omega2 * &inv;
    let block = theta_block(&covariance);
    Ok(VarianceReport {
        standard_errors: standard_errors(&block, data.n()),
        omega_hat: omega1,
        covariance,
        theta_block_inverse: block,
        kind: VarianceKind::Sandwich,
    })
}

/// Profile values `(ĉ₁, ĉ₂) = (log mean w^β, log mean w^α)`, `w = p/η̂`.
pub fn ns_gamma_profile_constants(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    data: &Dataset,
    eta: &dyn DensityEstimate,
    cfg: &GammaConfig,
) -> Result<(f64, f64)> {
    let lw = log_ratios(model, theta, data, eta)?;
    let n = (lw.len() as f64).ln();
    let lse =
        |e: f64| crate::numerics::log_sum_exp(&lw.iter().map(|l| e * l).collect::<Vec<_>>()) - n;
    Ok((lse(cfg.beta()), lse(cfg.alpha())))
}

fn log_ratios(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    data: &Dataset,
    eta: &dyn DensityEstimate,
) -> Result<Vec<f64>> {
    data.points()
        .map(|x| {
            let le = eta.log_eval(x);
            if le.is_finite() {
                Ok(model.log_p(x, theta) - le)
            } else {
                Err(Error::NonpositiveDensity { value: eta.eval(x) })
            }
        })
        .collect()
}

/// Sample mean of the estimating function
/// `U = (∇log p {w^β e^{-c₁} - w^α e^{-c₂}}, e^{c₁} - w^β, e^{c₂} - w^α)`.
pub fn ns_gamma_moment_check(
    model: &dyn UnnormalizedModel,
    theta_hat: &[f64],
    c1: f64,
    c2: f64,
    data: &Dataset,
    eta: &dyn DensityEstimate,
    cfg: &GammaConfig,
) -> Result<Vec<f64>> {
    let d = model.dim_theta();
    let lw = log_ratios(model, theta_hat, data, eta)?;
    let n = data.n() as f64;
    let mut u = vec![0.0; d + 2];
    let mut score = vec![0.0; d];
    for (x, l) in data.points().zip(&lw) {
        let wb = (cfg.beta() * l).exp();
        let wa = (cfg.alpha() * l).exp();
        model.grad_log_p(x, theta_hat, &mut score);
        let coef = wb * (-c1).exp() - wa * (-c2).exp();
        for (uj, sj) in u.iter_mut().zip(&score) {
            *uj += coef * sj / n;
        }
        u[d] += (c1.exp() - wb) / n;
        u[d + 1] += (c2.exp() - wa) / n;
    }
    Ok(u)
}
