use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::model::UnnormalizedModel;

/// `p(x; θ) = e^{θx} / x!` on the nonnegative integers.
#[derive(Debug, Clone)]
pub struct PoissonModel {
    /// Truncation used when the space has to be enumerated (sampling, KL).
    pub x_max: usize,
}

impl Default for PoissonModel {
    fn default() -> Self {
        PoissonModel { x_max: 60 }
    }
}

impl PoissonModel {
    pub fn new(x_max: usize) -> Self {
        PoissonModel { x_max }
    }
}

impl UnnormalizedModel for PoissonModel {
    fn name(&self) -> &str {
        "poisson"
    }
    fn dim_theta(&self) -> usize {
        1
    }
    fn dim_x(&self) -> usize {
        1
    }
    fn is_discrete(&self) -> bool {
        true
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        theta[0] * x[0] - ln_gamma(x[0] + 1.0)
    }
    fn grad_log_p(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }
    fn hess_log_p(&self, _x: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0])
    }
    fn enumeration_size(&self) -> Option<u128> {
        Some(self.x_max as u128 + 1)
    }
    fn for_each_point(&self, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        for k in 0..=self.x_max {
            visit(&[k as f64]);
        }
        Ok(())
    }
    /// `Σ_{x≥0} e^{θx}/x! = exp(e^θ)`, over the whole of ℕ.
    fn exact_log_normalizer(&self, theta: &[f64]) -> Result<f64> {
        Ok(theta[0].exp())
    }
    fn grad_exact_log_normalizer(&self, theta: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = theta[0].exp();
        Ok(())
    }
}
