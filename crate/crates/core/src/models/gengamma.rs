use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::Result;
use crate::model::UnnormalizedModel;

/// `p(x; θ) = exp(-θ₁ x²) x^{θ₂}` on `x > 0`.
///
/// Normalizable for `θ₁ > 0, θ₂ > -1` with
/// `∫ p = Γ((θ₂+1)/2) / (2 θ₁^{(θ₂+1)/2})`.
#[derive(Debug, Clone, Default)]
pub struct GenGammaModel;

impl UnnormalizedModel for GenGammaModel {
    fn name(&self) -> &str {
        "gengamma"
    }
    fn dim_theta(&self) -> usize {
        2
    }
    fn dim_x(&self) -> usize {
        1
    }
    fn is_discrete(&self) -> bool {
        false
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        let x = x[0];
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        -theta[0] * x * x + theta[1] * x.ln()
    }
    fn grad_log_p(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        let x = x[0];
        out[0] = -x * x;
        out[1] = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    }
    fn hess_log_p(&self, _x: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; 4])
    }
    fn initial_theta(&self, _seed: u64) -> Vec<f64> {
        // Inside the normalizable region, where the exact likelihood is finite.
        vec![1.0, 0.0]
    }
    fn exact_log_normalizer(&self, theta: &[f64]) -> Result<f64> {
        let (t1, t2) = (theta[0], theta[1]);
        if !(t1 > 0.0 && t2 > -1.0) {
            return Ok(f64::INFINITY);
        }
        let a = 0.5 * (t2 + 1.0);
        Ok(ln_gamma(a) - std::f64::consts::LN_2 - a * t1.ln())
    }
    fn grad_exact_log_normalizer(&self, theta: &[f64], out: &mut [f64]) -> Result<()> {
        let (t1, t2) = (theta[0], theta[1]);
        let a = 0.5 * (t2 + 1.0);
        out[0] = -a / t1;
        out[1] = 0.5 * digamma(a) - 0.5 * t1.ln();
        Ok(())
    }
}
