use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::space::Dataset;

use super::sampling::uniform01;

/// Known, samplable density `a(x)` for the contrastive baselines.
pub trait AuxiliaryDistribution: Send + Sync {
    fn dim(&self) -> usize;

    /// `log a(x)`, `-inf` off the support.
    fn log_density(&self, x: &[f64]) -> f64;

    fn sample(&self, n: usize, rng: &mut dyn rand::RngCore) -> Result<Dataset>;
}

/// Half-normal density `2 φ(x/σ)/σ` on `x > 0`.
#[derive(Debug, Clone)]
pub struct HalfNormal {
    pub scale: f64,
}

impl HalfNormal {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain("half-normal scale must be positive".into()));
        }
        Ok(HalfNormal { scale })
    }

    /// Scale chosen so that `E[x²] = σ²` equals the sample second moment.
    pub fn matched_to(data: &Dataset) -> Result<Self> {
        let m2 = data.values().iter().map(|x| x * x).sum::<f64>() / data.n() as f64;
        HalfNormal::new(m2.sqrt())
    }
}

impl AuxiliaryDistribution for HalfNormal {
    fn dim(&self) -> usize {
        1
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = x / self.scale;
        (2.0 / std::f64::consts::PI).sqrt().ln() - self.scale.ln() - 0.5 * z * z
    }
    fn sample(&self, n: usize, rng: &mut dyn rand::RngCore) -> Result<Dataset> {
        let normal = Normal::new(0.0, self.scale).map_err(|e| Error::Domain(e.to_string()))?;
        let mut xs = Vec::with_capacity(n);
        while xs.len() < n {
            let x: f64 = normal.sample(rng);
            let x = x.abs();
            if x > 0.0 {
                xs.push(x);
            }
        }
        Dataset::from_scalars(xs)
    }
}

/// Independent-inclusion distribution over subsets (0/1 indicator vectors).
#[derive(Debug, Clone)]
pub struct ProductBernoulli {
    pub probs: Vec<f64>,
}

impl ProductBernoulli {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::Domain(
                "inclusion probabilities must lie in (0, 1)".into(),
            ));
        }
        Ok(ProductBernoulli { probs })
    }

    /// Marginals set to the item frequencies, clamped to
    /// `[1/(2n), 1 - 1/(2n)]` so every subset keeps positive mass.
    pub fn matched_to(data: &Dataset) -> Result<Self> {
        let n = data.n() as f64;
        let lo = 0.5 / n;
        let mut freq = vec![0.0; data.dim()];
        for x in data.points() {
            for (f, xi) in freq.iter_mut().zip(x) {
                *f += xi;
            }
        }
        ProductBernoulli::new(freq.iter().map(|f| (f / n).clamp(lo, 1.0 - lo)).collect())
    }
}

impl AuxiliaryDistribution for ProductBernoulli {
    fn dim(&self) -> usize {
        self.probs.len()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(x)
            .map(|(p, xi)| if *xi > 0.5 { p.ln() } else { (-p).ln_1p() })
            .sum()
    }
    fn sample(&self, n: usize, rng: &mut dyn rand::RngCore) -> Result<Dataset> {
        let mut values = Vec::with_capacity(n * self.probs.len());
        for _ in 0..n {
            for p in &self.probs {
                values.push(if uniform01(rng) < *p { 1.0 } else { 0.0 });
            }
        }
        Dataset::new(self.probs.len(), values)
    }
}
