//! Bring your own model: a 1-D Ising chain with coupling θ₀ and field θ₁
//! on 12 spins, fitted by s-KL and checked against exact MLE.
//!
//! cargo run --release --example custom_model

use sdrme::bregman::{Generator, LinkPair, RatioSample};
use sdrme::estimators::{fit_exact_mle, fit_sdrme_separable_on, FitConfig};
use sdrme::model::model_space;
use sdrme::models::{rng_for, sample_discrete_exact};
use sdrme::nonparam::RegularizedPmf;
use sdrme::UnnormalizedModel;

struct IsingChain {
    len: usize,
}

impl UnnormalizedModel for IsingChain {
    fn name(&self) -> &str {
        "ising-chain"
    }
    fn dim_theta(&self) -> usize {
        2
    }
    fn dim_x(&self) -> usize {
        self.len
    }
    fn is_discrete(&self) -> bool {
        true
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        let mut g = [0.0; 2];
        self.grad_log_p(x, theta, &mut g);
        theta[0] * g[0] + theta[1] * g[1]
    }
    fn grad_log_p(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        out[0] = x.windows(2).map(|w| w[0] * w[1]).sum();
        out[1] = x.iter().sum();
    }
    fn hess_log_p(&self, _x: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; 4])
    }
    fn enumeration_size(&self) -> Option<u128> {
        Some(1 << self.len)
    }
    fn for_each_point(&self, visit: &mut dyn FnMut(&[f64])) -> sdrme::Result<()> {
        let mut x = vec![0.0; self.len];
        for code in 0u32..(1 << self.len) {
            for (j, v) in x.iter_mut().enumerate() {
                *v = if code >> j & 1 == 1 { 1.0 } else { -1.0 };
            }
            visit(&x);
        }
        Ok(())
    }
}

fn main() -> sdrme::Result<()> {
    let model = IsingChain { len: 12 };
    let theta_star = [0.4, -0.2];
    let data = sample_discrete_exact(&model, &theta_star, 3000, 5)?;

    let eta = RegularizedPmf::new(&data, &model_space(&model)?, &mut rng_for(5, 1))?;
    let rs = RatioSample::weighted(eta.mixture_sample(&data)?, &eta)?;
    let cfg = FitConfig::default();
    let skl = fit_sdrme_separable_on(&model, &rs, &Generator::Kl, &LinkPair::default(), &cfg)?;
    let mle = fit_exact_mle(&model, &data, &cfg)?;
    println!("θ*   {theta_star:?}");
    println!("s-KL {:?}", skl.theta());
    println!("MLE  {:?}", mle.theta());
    Ok(())
}
