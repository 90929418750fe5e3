use rand::Rng;

use crate::error::Result;
use crate::model::UnnormalizedModel;
use crate::numerics::ln_cosh;

use super::sampling::rng_for;

/// Restricted Boltzmann machine with `±1` units, hidden layer summed out:
/// `log p(v; W) = Σ_{k=1}^{d_h} log cosh((vᵀW)_k)`.
///
/// θ is `W` flattened row-major (`d_v × d_h`).
#[derive(Debug, Clone)]
pub struct RbmModel {
    pub d_v: usize,
    pub d_h: usize,
}

impl RbmModel {
    pub fn new(d_v: usize, d_h: usize) -> Self {
        RbmModel { d_v, d_h }
    }

    fn activations(&self, v: &[f64], w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|a| *a = 0.0);
        for (j, vj) in v.iter().enumerate() {
            let row = &w[j * self.d_h..(j + 1) * self.d_h];
            for (a, wjk) in out.iter_mut().zip(row) {
                *a += vj * wjk;
            }
        }
    }
}

impl UnnormalizedModel for RbmModel {
    fn name(&self) -> &str {
        "rbm"
    }
    fn dim_theta(&self) -> usize {
        self.d_v * self.d_h
    }
    fn dim_x(&self) -> usize {
        self.d_v
    }
    fn is_discrete(&self) -> bool {
        true
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        let mut a = vec![0.0; self.d_h];
        self.activations(x, theta, &mut a);
        a.iter().map(|&ak| ln_cosh(ak)).sum()
    }
    fn grad_log_p(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let mut a = vec![0.0; self.d_h];
        self.activations(x, theta, &mut a);
        let t: Vec<f64> = a.iter().map(|ak| ak.tanh()).collect();
        for (j, vj) in x.iter().enumerate() {
            for k in 0..self.d_h {
                out[j * self.d_h + k] = vj * t[k];
            }
        }
    }
    fn hess_log_p(&self, x: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim_theta();
        let mut a = vec![0.0; self.d_h];
        self.activations(x, theta, &mut a);
        let mut h = vec![0.0; d * d];
        for k in 0..self.d_h {
            let sech2 = 1.0 - a[k].tanh().powi(2);
            for j in 0..self.d_v {
                for l in 0..self.d_v {
                    h[(j * self.d_h + k) * d + l * self.d_h + k] = x[j] * x[l] * sech2;
                }
            }
        }
        Some(h)
    }
    /// Small seeded perturbation of `W = 0`, which is a stationary point of
    /// every loss (the model is even in each column of `W`).
    fn initial_theta(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng_for(seed, 0x5eed_0001);
        (0..self.dim_theta())
            .map(|_| rng.random_range(-0.1..0.1))
            .collect()
    }
    fn enumeration_size(&self) -> Option<u128> {
        1u128.checked_shl(self.d_v as u32)
    }
    fn for_each_point(&self, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        let mut v = vec![0.0; self.d_v];
        for code in 0u64..(1u64 << self.d_v) {
            for (j, vj) in v.iter_mut().enumerate() {
                *vj = if code >> j & 1 == 1 { 1.0 } else { -1.0 };
            }
            visit(&v);
        }
        Ok(())
    }
}

/// `log Σ_v Π_k cosh((vᵀW)_k)` by enumerating all `2^{d_v}` spin vectors.
pub fn rbm_exact_normalizer(model: &RbmModel, w: &[f64]) -> Result<f64> {
    model.exact_log_normalizer(w)
}
