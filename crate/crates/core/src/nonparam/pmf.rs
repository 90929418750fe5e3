use std::collections::HashMap;

use rand::Rng;

use crate::density::{DensityEstimate, ETA_FLOOR};
use crate::error::{Error, Result};
use crate::space::{Dataset, PointKey, SampleSpace, WeightedSample};

/// A probability table that can be queried point by point.
pub trait Pmf {
    /// Unfloored probability of `x` (0 off the support).
    fn prob(&self, x: &[f64]) -> f64;
}

/// Relative frequencies `n_x / n` of a dataset.
#[derive(Debug, Clone)]
pub struct EmpiricalPmf {
    counts: HashMap<PointKey, usize>,
    n: usize,
}

impl EmpiricalPmf {
    pub fn new(data: &Dataset) -> Self {
        let mut counts = HashMap::new();
        for p in data.points() {
            *counts.entry(PointKey::new(p)).or_insert(0) += 1;
        }
        EmpiricalPmf {
            counts,
            n: data.n(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, x: &[f64]) -> usize {
        self.counts.get(&PointKey::new(x)).copied().unwrap_or(0)
    }

    /// Number of distinct points observed.
    pub fn support_size(&self) -> usize {
        self.counts.len()
    }
}

impl Pmf for EmpiricalPmf {
    fn prob(&self, x: &[f64]) -> f64 {
        self.count(x) as f64 / self.n as f64
    }
}

impl DensityEstimate for EmpiricalPmf {
    fn eval(&self, x: &[f64]) -> f64 {
        self.prob(x).max(ETA_FLOOR)
    }
}

/// `(1 - 1/n) p_n(x) + u_n(x)/n`, where `u_n` is the empirical pmf of `n`
/// uniform draws over the sample space.
#[derive(Debug, Clone)]
pub struct RegularizedPmf {
    base: EmpiricalPmf,
    uniform_part: EmpiricalPmf,
    draws: Dataset,
}

impl RegularizedPmf {
    pub fn new(data: &Dataset, space: &SampleSpace, rng: &mut dyn rand::RngCore) -> Result<Self> {
        let (dim, points) = match space {
            SampleSpace::DiscreteEnumerable { dim, points } => (*dim, points),
            _ => {
                return Err(Error::config(
                    "sample_space",
                    "regularized pmf needs an enumerable space",
                ))
            }
        };
        if dim != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.dim(),
            });
        }
        let k = points.len() / dim;
        let n = data.n();
        let mut draws = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let j = rng.random_range(0..k);
            draws.extend_from_slice(&points[j * dim..(j + 1) * dim]);
        }
        let draws = Dataset::new(dim, draws)?;
        Ok(RegularizedPmf {
            base: EmpiricalPmf::new(data),
            uniform_part: EmpiricalPmf::new(&draws),
            draws,
        })
    }

    pub fn base(&self) -> &EmpiricalPmf {
        &self.base
    }

    pub fn uniform_part(&self) -> &EmpiricalPmf {
        &self.uniform_part
    }

    /// The mixture as a measure: every point of its support (data points
    /// and uniform draws) weighted by `n` times its mixture probability, so
    /// the weights sum to `n`. Losses averaged over this sample instead of
    /// the data are what give the uniform part its regularizing effect.
    pub fn mixture_sample(&self, data: &Dataset) -> Result<WeightedSample> {
        let mut values = data.values().to_vec();
        values.extend_from_slice(self.draws.values());
        let support = Dataset::new(data.dim(), values)?.compress();
        let n = self.base.n as f64;
        let weights = support.iter().map(|(x, _)| n * self.prob(x)).collect();
        let values = support.iter().flat_map(|(x, _)| x.to_vec()).collect();
        WeightedSample::new(data.dim(), values, weights)
    }
}

impl Pmf for RegularizedPmf {
    fn prob(&self, x: &[f64]) -> f64 {
        let n = self.base.n as f64;
        (1.0 - 1.0 / n) * self.base.prob(x) + self.uniform_part.prob(x) / n
    }
}

impl DensityEstimate for RegularizedPmf {
    fn eval(&self, x: &[f64]) -> f64 {
        self.prob(x).max(ETA_FLOOR)
    }
}

/// Probability of `x` under either pmf, without flooring.
pub fn empirical_pmf_eval(pmf: &dyn Pmf, x: &[f64]) -> f64 {
    pmf.prob(x)
}
