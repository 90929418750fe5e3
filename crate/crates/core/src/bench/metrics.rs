use crate::error::{Error, Result};
use crate::model::UnnormalizedModel;
use crate::models::DiscreteDistribution;

/// `KL(η* ‖ p̂) = Σ_x η*(x) [log η*(x) - log p̂(x)]`, where `p̂` is the model
/// at `θ` normalized by its exact normalizer.
pub fn exact_kl_discrete(
    truth: &DiscreteDistribution,
    model: &dyn UnnormalizedModel,
    theta: &[f64],
) -> Result<f64> {
    let log_z = model.exact_log_normalizer(theta)?;
    kl_with(truth, |x| model.log_p(x, theta) - log_z)
}

/// `KL(p ‖ q)` between two tables; `q` is looked up at `p`'s points.
pub fn kl_between(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    kl_with(p, |x| q.prob(x).ln())
}

fn kl_with(truth: &DiscreteDistribution, log_fitted: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let mut kl = 0.0;
    for (x, p) in truth.iter() {
        if p == 0.0 {
            continue;
        }
        let lq = log_fitted(x);
        if lq == f64::NEG_INFINITY {
            return Err(Error::InfiniteKl);
        }
        kl += p * (p.ln() - lq);
    }
    Ok(kl.max(0.0))
}

/// `n ‖θ̂ - θ*‖²`.
pub fn scaled_mse(theta_hat: &[f64], theta_star: &[f64], n: usize) -> Result<f64> {
    if theta_hat.len() != theta_star.len() {
        return Err(Error::DimensionMismatch {
            expected: theta_star.len(),
            got: theta_hat.len(),
        });
    }
    Ok(n as f64
        * theta_hat
            .iter()
            .zip(theta_star)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>())
}
