//! Sample spaces and datasets.
//!
//! Every sample point is a dense `f64` vector, whatever the underlying
//! space: spins are `±1`, subsets are 0/1 indicator rows and counts are
//! nonnegative integers stored as reals. A [`Dataset`] stores its points in
//! one flat row-major buffer.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Underlying measure of the sample space.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSpace {
    /// Counting measure over an explicit finite list of points.
    DiscreteEnumerable { dim: usize, points: Vec<f64> },
    /// Counting measure over a countable space that is enumerated only up
    /// to a truncation (e.g. the nonnegative integers).
    DiscreteCountable { dim: usize },
    /// Lebesgue measure on (a subset of) `R^dim`.
    Continuous { dim: usize, support: String },
}

impl SampleSpace {
    pub fn enumerable(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::config(
                "sample_space",
                "enumerable space needs a non-empty point list",
            ));
        }
        let mut seen = HashMap::new();
        for p in points.chunks(dim) {
            if seen.insert(PointKey::new(p), ()).is_some() {
                return Err(Error::config(
                    "sample_space",
                    "duplicate point in enumeration",
                ));
            }
        }
        Ok(SampleSpace::DiscreteEnumerable { dim, points })
    }

    pub fn continuous(dim: usize, support: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config(
                "sample_space",
                "continuous dimension must be >= 1",
            ));
        }
        Ok(SampleSpace::Continuous {
            dim,
            support: support.into(),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SampleSpace::DiscreteEnumerable { dim, .. }
            | SampleSpace::DiscreteCountable { dim }
            | SampleSpace::Continuous { dim, .. } => *dim,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, SampleSpace::Continuous { .. })
    }

    /// Enumerated points, when the space is finite.
    pub fn points(&self) -> Option<impl Iterator<Item = &[f64]>> {
        match self {
            SampleSpace::DiscreteEnumerable { dim, points } => Some(points.chunks(*dim)),
            _ => None,
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            SampleSpace::DiscreteEnumerable { dim, points } => Some(points.len() / dim),
            _ => None,
        }
    }

    /// `Some(true)` only for an enumerable space with no points, which the
    /// constructors rule out.
    pub fn is_empty(&self) -> Option<bool> {
        self.len().map(|n| n == 0)
    }
}

/// Hashable identity of a sample point (bitwise, with `-0.0` folded into
/// `0.0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointKey(Vec<u64>);

impl PointKey {
    pub fn new(x: &[f64]) -> Self {
        PointKey(x.iter().map(|v| (v + 0.0).to_bits()).collect())
    }
}

/// i.i.d. sample `x_1..x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer.
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dataset", "point dimension must be >= 1"));
        }
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len() % dim,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("dataset contains non-finite values".into()));
        }
        Ok(Dataset { dim, values })
    }

    pub fn from_scalars(values: Vec<f64>) -> Result<Self> {
        Dataset::new(1, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptyData)?;
        let mut values = Vec::with_capacity(dim * rows.len());
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Dataset::new(dim, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Checks that every point belongs to `space`.
    pub fn check_in(&self, space: &SampleSpace) -> Result<()> {
        if space.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: self.dim,
            });
        }
        if let SampleSpace::DiscreteEnumerable { dim, points } = space {
            let keys: HashMap<PointKey, ()> = points
                .chunks(*dim)
                .map(|p| (PointKey::new(p), ()))
                .collect();
            if let Some(bad) = self
                .points()
                .position(|p| !keys.contains_key(&PointKey::new(p)))
            {
                return Err(Error::Domain(format!(
                    "data point {bad} is outside the sample space"
                )));
            }
        }
        Ok(())
    }

    /// FNV-1a hash over the raw bits, used to check that estimators in one
    /// replication see the same data.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    /// Distinct points with their multiplicities, in order of first
    /// appearance.
    pub fn compress(&self) -> WeightedSample {
        let mut index: HashMap<PointKey, usize> = HashMap::new();
        let mut values = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for p in self.points() {
            let key = PointKey::new(p);
            match index.get(&key) {
                Some(&k) => weights[k] += 1.0,
                None => {
                    index.insert(key, weights.len());
                    values.extend_from_slice(p);
                    weights.push(1.0);
                }
            }
        }
        WeightedSample {
            dim: self.dim,
            values,
            weights,
            n: self.n() as f64,
        }
    }
}

/// Distinct sample points with multiplicities; sums over a dataset are
/// computed as weighted sums over this representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    dim: usize,
    values: Vec<f64>,
    weights: Vec<f64>,
    n: f64,
}

impl WeightedSample {
    /// Distinct points with nonnegative weights; the total `n` is the sum of
    /// the weights.
    pub fn new(dim: usize, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                got: values.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::EmptyData);
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain(
                "sample weights must be finite and nonnegative".into(),
            ));
        }
        let n = weights.iter().sum();
        Ok(WeightedSample {
            dim,
            values,
            weights,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total sample size `n` (sum of multiplicities).
    pub fn total(&self) -> f64 {
        self.n
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.values
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }
}
