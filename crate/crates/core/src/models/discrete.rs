use std::collections::HashMap;

use statrs::function::gamma::gamma;

use crate::density::{DensityEstimate, ETA_FLOOR};
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp;
use crate::space::{Dataset, PointKey};

use super::auxiliary::AuxiliaryDistribution;
use super::sampling::uniform01;

/// A finite distribution given by a table of points and probabilities.
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    dim: usize,
    points: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    index: HashMap<PointKey, usize>,
}

impl DiscreteDistribution {
    /// Probabilities are renormalized to sum to 1.
    pub fn new(dim: usize, points: Vec<f64>, weights: &[f64]) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() || weights.is_empty() {
            return Err(Error::config("distribution", "points and weights disagree"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let index = points
            .chunks(dim)
            .enumerate()
            .map(|(k, p)| (PointKey::new(p), k))
            .collect();
        Ok(DiscreteDistribution {
            dim,
            points,
            probs,
            cdf,
            index,
        })
    }

    pub fn from_log_weights(dim: usize, points: Vec<f64>, log_weights: &[f64]) -> Result<Self> {
        let lse = log_sum_exp(log_weights);
        let w: Vec<f64> = log_weights.iter().map(|l| (l - lse).exp()).collect();
        DiscreteDistribution::new(dim, points, &w)
    }

    /// Uniform distribution over the given points.
    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        let k = points.len() / dim.max(1);
        DiscreteDistribution::new(dim, points, &vec![1.0; k])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of `x`; 0 off the table.
    pub fn prob(&self, x: &[f64]) -> f64 {
        self.index
            .get(&PointKey::new(x))
            .map_or(0.0, |&k| self.probs[k])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks(self.dim).zip(self.probs.iter().copied())
    }

    pub fn sample_n(&self, n: usize, rng: &mut dyn rand::RngCore) -> Result<Dataset> {
        let mut values = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            let u = uniform01(rng);
            let k = self
                .cdf
                .partition_point(|&c| c <= u)
                .min(self.probs.len() - 1);
            values.extend_from_slice(&self.points[k * self.dim..(k + 1) * self.dim]);
        }
        Dataset::new(self.dim, values)
    }
}

impl DensityEstimate for DiscreteDistribution {
    fn eval(&self, x: &[f64]) -> f64 {
        self.prob(x).max(ETA_FLOOR)
    }
}

impl AuxiliaryDistribution for DiscreteDistribution {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        self.prob(x).ln()
    }
    fn sample(&self, n: usize, rng: &mut dyn rand::RngCore) -> Result<Dataset> {
        self.sample_n(n, rng)
    }
}

/// Fixed non-Poisson truth over `{0..x_max}`:
/// `0.5 e^{-2} 2^{x-0.2} / Γ(x+0.8) + 0.5 e^{-1} / Γ(x-0.2)`, where a term
/// whose Γ argument is ≤ 0 (or whose value is negative) is dropped, and the
/// table is renormalized.
pub fn misspecified_truth_pmf(x_max: usize) -> Result<DiscreteDistribution> {
    if x_max < 30 {
        return Err(Error::config("x_max", "must be >= 30"));
    }
    let term = |arg: f64, numerator: f64| -> f64 {
        if arg <= 0.0 {
            return 0.0;
        }
        let v = numerator / gamma(arg);
        if v.is_finite() && v > 0.0 {
            v
        } else {
            0.0
        }
    };
    let mut points = Vec::with_capacity(x_max + 1);
    let mut weights = Vec::with_capacity(x_max + 1);
    for k in 0..=x_max {
        let x = k as f64;
        let first = term(x + 0.8, 0.5 * (-2.0f64).exp() * 2f64.powf(x - 0.2));
        let second = term(x - 0.2, 0.5 * (-1.0f64).exp());
        points.push(x);
        weights.push(first + second);
    }
    DiscreteDistribution::new(1, points, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_is_normalized_and_positive() {
        let t = misspecified_truth_pmf(60).unwrap();
        let total: f64 = t.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(t.probs().iter().all(|&p| p >= 0.0));
        for x in 1..=20 {
            assert!(t.prob(&[x as f64]) > 0.0, "x = {x}");
        }
    }

    #[test]
    fn truth_is_not_poisson() {
        let t = misspecified_truth_pmf(60).unwrap();
        // Grid scan of KL(truth ‖ Poisson(λ)).
        let min_kl = (1..=800)
            .map(|i| {
                let lambda = 0.01 * i as f64;
                t.iter()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(x, p)| {
                        let lq = x[0] * lambda.ln()
                            - lambda
                            - statrs::function::gamma::ln_gamma(x[0] + 1.0);
                        p * (p.ln() - lq)
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(min_kl > 0.001, "{min_kl}");
    }

    #[test]
    fn lookup_and_sampling() {
        let d = DiscreteDistribution::new(1, vec![0.0, 1.0, 2.0], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(d.prob(&[1.0]), 0.5);
        assert_eq!(d.prob(&[5.0]), 0.0);
        let mut rng = crate::models::rng_for(1, 1);
        let s = d.sample_n(1000, &mut rng).unwrap();
        assert!(s.values().iter().all(|v| [0.0, 1.0, 2.0].contains(v)));
    }
}
