use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::model::{enumerate_log_pmf, UnnormalizedModel};
use crate::space::Dataset;

use super::discrete::DiscreteDistribution;

/// Deterministic generator for `(seed, stream)`; distinct streams of the
/// same seed never overlap.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Counter-based seed derivation (SplitMix64 finalizer over the mixed
/// inputs), used to give each replication its own seed.
pub fn seed_stream(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(b.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n` i.i.d. draws from the exactly normalized model by inverse CDF over
/// its enumerated space.
pub fn sample_discrete_exact(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let dist = DiscreteDistribution::from_model(model, theta)?;
    let mut rng = rng_for(seed, 0);
    dist.sample_n(n, &mut rng)
}

/// Draws from `exp(-θ₁x²) x^{θ₂}` via `X = √G`, `G ~ Gamma((θ₂+1)/2, rate θ₁)`.
pub fn sample_gengamma(theta1: f64, theta2: f64, n: usize, seed: u64) -> Result<Dataset> {
    if !(theta1 > 0.0 && theta2 > -1.0) {
        return Err(Error::Domain(
            "generalized gamma needs θ₁ > 0 and θ₂ > -1".into(),
        ));
    }
    let gamma =
        Gamma::new(0.5 * (theta2 + 1.0), 1.0 / theta1).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = rng_for(seed, 0);
    let mut xs = Vec::with_capacity(n);
    while xs.len() < n {
        let x = gamma.sample(&mut rng).sqrt();
        // Gamma draws can underflow to 0 for small shapes; the support is x > 0.
        if x > 0.0 {
            xs.push(x);
        }
    }
    Dataset::from_scalars(xs)
}

pub(crate) fn uniform01(rng: &mut dyn rand::RngCore) -> f64 {
    rng.random::<f64>()
}

impl DiscreteDistribution {
    pub fn from_model(model: &dyn UnnormalizedModel, theta: &[f64]) -> Result<Self> {
        let (points, logp) = enumerate_log_pmf(model, theta)?;
        DiscreteDistribution::from_log_weights(model.dim_x(), points, &logp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FlidModel, PoissonModel, RbmModel};
    use statrs::distribution::{ContinuousCDF, Exp};

    #[test]
    fn deterministic_per_seed() {
        let m = PoissonModel::default();
        let a = sample_discrete_exact(&m, &[2f64.ln()], 500, 11).unwrap();
        let b = sample_discrete_exact(&m, &[2f64.ln()], 500, 11).unwrap();
        let c = sample_discrete_exact(&m, &[2f64.ln()], 500, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rbm_frequencies_within_four_sigma() {
        let m = RbmModel::new(4, 2);
        let w = [0.4, -0.3, 0.8, 0.2, -0.5, 0.6, 0.1, -0.9];
        let n = 100_000;
        let data = sample_discrete_exact(&m, &w, n, 5).unwrap();
        let dist = DiscreteDistribution::from_model(&m, &w).unwrap();
        let counts = data.compress();
        for (x, p) in dist.iter() {
            let observed = counts.iter().find(|(y, _)| *y == x).map_or(0.0, |(_, c)| c);
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((observed - n as f64 * p).abs() <= 4.0 * sd + 1e-9, "{x:?}");
        }
    }

    #[test]
    fn flid_empty_set_frequency() {
        let m = FlidModel::new(12, 2);
        let mut rng = rng_for(1, 9);
        let theta: Vec<f64> = (0..36).map(|_| rng.random_range(0.0..1.0)).collect();
        let dist = DiscreteDistribution::from_model(&m, &theta).unwrap();
        let p_empty = dist.prob(&[0.0; 12]);
        let n = 50_000;
        let data = sample_discrete_exact(&m, &theta, n, 2).unwrap();
        let observed = data
            .points()
            .filter(|x| x.iter().all(|&v| v == 0.0))
            .count() as f64;
        let sd = (n as f64 * p_empty * (1.0 - p_empty)).sqrt();
        assert!((observed - n as f64 * p_empty).abs() <= 4.0 * sd.max(1.0));
    }

    #[test]
    fn gengamma_second_moment() {
        let d = sample_gengamma(1.3, 1.3, 100_000, 3).unwrap();
        let m2 = d.values().iter().map(|x| x * x).sum::<f64>() / 1e5;
        assert!((m2 - 2.3 / 2.6).abs() < 0.01, "{m2}");
        assert!(d.values().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn gengamma_square_is_exponential_when_theta_is_one() {
        let n = 4000;
        let d = sample_gengamma(1.0, 1.0, n, 8).unwrap();
        let mut sq: Vec<f64> = d.values().iter().map(|x| x * x).collect();
        sq.sort_by(f64::total_cmp);
        let exp = Exp::new(1.0).unwrap();
        let ks = sq
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = exp.cdf(x);
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // Critical value at the 1% level.
        assert!(ks < 1.628 / (n as f64).sqrt(), "KS = {ks}");
    }

    #[test]
    fn seed_streams_differ() {
        assert_ne!(seed_stream(1, 0, 0), seed_stream(1, 0, 1));
        assert_ne!(seed_stream(1, 1, 0), seed_stream(1, 0, 1));
        assert_eq!(seed_stream(9, 3, 4), seed_stream(9, 3, 4));
    }
}
