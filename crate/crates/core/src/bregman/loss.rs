use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::model::{ExtendedModel, Tau, UnnormalizedModel};
use crate::space::{Dataset, WeightedSample};

use super::generator::{bregman_unchecked, Generator};
use super::links::LinkPair;

/// A dataset compressed to distinct points, with `log η̂` evaluated once at
/// each of them. Every loss in this module is a weighted sum over it.
#[derive(Debug, Clone)]
pub struct RatioSample {
    pub(crate) sample: WeightedSample,
    pub(crate) log_eta: Vec<f64>,
}

impl RatioSample {
    pub fn new(data: &Dataset, eta: &dyn DensityEstimate) -> Result<Self> {
        RatioSample::weighted(data.compress(), eta)
    }

    /// Averages over an arbitrary weighted sample instead of the data.
    pub fn weighted(sample: WeightedSample, eta: &dyn DensityEstimate) -> Result<Self> {
        let log_eta = sample
            .iter()
            .map(|(x, _)| {
                let le = eta.log_eval(x);
                if le.is_finite() {
                    Ok(le)
                } else {
                    Err(Error::NonpositiveDensity { value: eta.eval(x) })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RatioSample { sample, log_eta })
    }

    pub fn n(&self) -> f64 {
        self.sample.total()
    }

    pub fn sample(&self) -> &WeightedSample {
        &self.sample
    }

    pub fn log_eta(&self) -> &[f64] {
        &self.log_eta
    }

    /// `log w(x_k; τ)` for every distinct point.
    pub fn log_ratios(&self, model: &dyn UnnormalizedModel, tau: &[f64]) -> Vec<f64> {
        let ext = ExtendedModel::new(model);
        self.sample
            .iter()
            .zip(&self.log_eta)
            .map(|((x, _), le)| ext.log_q(x, tau) - le)
            .collect()
    }

    /// `(1/n) Σ B_f{h₁(w), h₂(w)}` at packed `τ`, with the τ-gradient
    /// written into `grad` when given.
    pub fn separable(
        &self,
        model: &dyn UnnormalizedModel,
        tau: &[f64],
        f: &Generator,
        links: &LinkPair,
        mut grad: Option<&mut [f64]>,
    ) -> Result<f64> {
        let ext = ExtendedModel::new(model);
        let mut score = vec![0.0; tau.len()];
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut total = 0.0;
        for ((x, m), le) in self.sample.iter().zip(&self.log_eta) {
            let w = (ext.log_q(x, tau) - le).exp();
            let (u, v) = (links.h1.eval(w), links.h2.eval(w));
            let u_ok = u > 0.0 || (u == 0.0 && f.defined_at_zero());
            if !w.is_finite() || !u_ok || !u.is_finite() || !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "density ratio {w} outside the generator's domain"
                )));
            }
            total += m * bregman_unchecked(f, u, v);
            if let Some(g) = grad.as_deref_mut() {
                let db =
                    (f.d1(u) - f.d1(v)) * links.h1.deriv(w) - f.d2(v) * links.h2.deriv(w) * (u - v);
                ext.grad_tau_log_q(x, tau, &mut score);
                let s = m * db * w;
                for (gj, sj) in g.iter_mut().zip(&score) {
                    *gj += s * sj;
                }
            }
        }
        let n = self.n();
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v /= n);
        }
        Ok(total / n)
    }

    /// `-(1/n) Σ log q + (1/n) Σ q/η̂`.
    pub fn skl(
        &self,
        model: &dyn UnnormalizedModel,
        tau: &[f64],
        mut grad: Option<&mut [f64]>,
    ) -> Result<f64> {
        let ext = ExtendedModel::new(model);
        let mut score = vec![0.0; tau.len()];
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut total = 0.0;
        for ((x, m), le) in self.sample.iter().zip(&self.log_eta) {
            let lq = ext.log_q(x, tau);
            let w = (lq - le).exp();
            if !w.is_finite() || !lq.is_finite() {
                return Err(Error::Domain(format!("density ratio {w} is not finite")));
            }
            total += m * (w - lq);
            if let Some(g) = grad.as_deref_mut() {
                ext.grad_tau_log_q(x, tau, &mut score);
                for (gj, sj) in g.iter_mut().zip(&score) {
                    *gj += m * (w - 1.0) * sj;
                }
            }
        }
        let n = self.n();
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v /= n);
        }
        Ok(total / n)
    }
}

/// Separable SDRME loss `(1/n) Σ B_f{h₁(w_i), h₂(w_i)}`.
pub fn sdrme_separable_loss(
    model: &ExtendedModel<'_>,
    tau: &Tau,
    data: &Dataset,
    eta: &dyn DensityEstimate,
    f: &Generator,
    links: &LinkPair,
) -> Result<f64> {
    RatioSample::new(data, eta)?.separable(model.base, &tau.to_vec(), f, links, None)
}

/// Loss and τ-gradient of [`sdrme_separable_loss`].
pub fn sdrme_separable_loss_grad(
    model: &ExtendedModel<'_>,
    tau: &Tau,
    data: &Dataset,
    eta: &dyn DensityEstimate,
    f: &Generator,
    links: &LinkPair,
) -> Result<(f64, Vec<f64>)> {
    let mut g = vec![0.0; tau.dim()];
    let v = RatioSample::new(data, eta)?.separable(
        model.base,
        &tau.to_vec(),
        f,
        links,
        Some(&mut g),
    )?;
    Ok((v, g))
}

/// The s-KL loss `-(1/n) Σ log q(x_i; τ) + (1/n) Σ q(x_i; τ)/η̂(x_i)`.
pub fn skl_loss(
    model: &ExtendedModel<'_>,
    tau: &Tau,
    data: &Dataset,
    eta: &dyn DensityEstimate,
) -> Result<f64> {
    RatioSample::new(data, eta)?.skl(model.base, &tau.to_vec(), None)
}

pub fn skl_loss_grad(
    model: &ExtendedModel<'_>,
    tau: &Tau,
    data: &Dataset,
    eta: &dyn DensityEstimate,
) -> Result<(f64, Vec<f64>)> {
    let mut g = vec![0.0; tau.dim()];
    let v = RatioSample::new(data, eta)?.skl(model.base, &tau.to_vec(), Some(&mut g))?;
    Ok((v, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::Link;
    use crate::density::{ModelDensity, NormalizedModelDensity};
    use crate::models::{sample_discrete_exact, PoissonModel, RbmModel};
    use crate::numerics::{finite_difference_gradient, max_rel_err};

    struct Constant(f64);
    impl DensityEstimate for Constant {
        fn eval(&self, _x: &[f64]) -> f64 {
            self.0
        }
    }

    fn poisson_data() -> Dataset {
        sample_discrete_exact(&PoissonModel::default(), &[2f64.ln()], 300, 3).unwrap()
    }

    #[test]
    fn zero_at_ratio_matching_point() {
        let m = PoissonModel::default();
        let tau = Tau::new(0.4, vec![0.3]).unwrap();
        let eta = ModelDensity::new(&m, &tau.to_vec());
        let ext = ExtendedModel::new(&m);
        for f in [Generator::Kl, Generator::Chi, Generator::Js] {
            let l =
                sdrme_separable_loss(&ext, &tau, &poisson_data(), &eta, &f, &LinkPair::default())
                    .unwrap();
            assert!(l.abs() < 1e-15);
        }
    }

    #[test]
    fn single_point_kl_example() {
        // With η̂ = q/2 at the point, w = 2.
        let m = PoissonModel::default();
        let data = Dataset::from_scalars(vec![1.0]).unwrap();
        let tau = Tau::new(0.0, vec![0.0]).unwrap();
        let eta = Constant(0.5);
        let l = sdrme_separable_loss(
            &ExtendedModel::new(&m),
            &tau,
            &data,
            &eta,
            &Generator::Kl,
            &LinkPair::default(),
        )
        .unwrap();
        assert!((l - (1.0 - 2f64.ln())).abs() < 1e-15);
        let g = Generator::Kl;
        let w = 2.0;
        let example = -g.d1(w) + w * g.d1(w) - g.f(w);
        assert!((l - example).abs() < 1e-15);
    }

    #[test]
    fn constant_ratio_kl() {
        let m = PoissonModel::default();
        let data = Dataset::from_scalars(vec![0.0, 0.0, 0.0]).unwrap();
        let ext = ExtendedModel::new(&m);
        for w in [0.3, 1.0, 2.5] {
            // At θ = 0 and x = 0, q = e^{-c}; choose η̂ so that w is constant.
            let tau = Tau::new(0.0, vec![0.0]).unwrap();
            let l = sdrme_separable_loss(
                &ext,
                &tau,
                &data,
                &Constant(1.0 / w),
                &Generator::Kl,
                &LinkPair::default(),
            )
            .unwrap();
            assert!((l - (w - w.ln() - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn skl_at_matching_point_and_shift() {
        let m = PoissonModel::default();
        let tau = Tau::new(0.4, vec![0.3]).unwrap();
        let data = poisson_data();
        let eta = ModelDensity::new(&m, &tau.to_vec());
        let ext = ExtendedModel::new(&m);
        let l = skl_loss(&ext, &tau, &data, &eta).unwrap();
        let expected = -data.points().map(|x| eta.log_eval(x)).sum::<f64>() / data.n() as f64 + 1.0;
        assert!((l - expected).abs() < 1e-12);

        let eta = NormalizedModelDensity::new(&m, &[0.5]).unwrap();
        let base = skl_loss(&ext, &tau, &data, &eta).unwrap();
        let shifted = skl_loss(
            &ext,
            &Tau::new(tau.c + 0.7, tau.theta.clone()).unwrap(),
            &data,
            &eta,
        )
        .unwrap();
        let rs = RatioSample::new(&data, &eta).unwrap();
        let mean_w: f64 = rs
            .log_ratios(&m, &tau.to_vec())
            .iter()
            .zip(rs.sample().weights())
            .map(|(l, m)| m * l.exp())
            .sum::<f64>()
            / rs.n();
        let expected = base + 0.7 - mean_w + mean_w * (-0.7f64).exp();
        assert!((shifted - expected).abs() < 1e-12);
    }

    #[test]
    fn skl_gradient_equals_kl_separable_gradient() {
        let m = PoissonModel::default();
        let data = poisson_data();
        let eta = NormalizedModelDensity::new(&m, &[0.9]).unwrap();
        let ext = ExtendedModel::new(&m);
        for tau in [
            Tau::new(0.1, vec![0.2]).unwrap(),
            Tau::new(-1.0, vec![1.1]).unwrap(),
        ] {
            let (_, g1) = skl_loss_grad(&ext, &tau, &data, &eta).unwrap();
            let (_, g2) = sdrme_separable_loss_grad(
                &ext,
                &tau,
                &data,
                &eta,
                &Generator::Kl,
                &LinkPair::default(),
            )
            .unwrap();
            assert!(max_rel_err(&g1, &g2) < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = RbmModel::new(4, 2);
        let theta: Vec<f64> = (0..8).map(|i| 0.3 * ((i as f64) * 1.7).sin()).collect();
        let data = sample_discrete_exact(&m, &theta, 200, 9).unwrap();
        let eta = crate::models::DiscreteDistribution::from_model(&m, &[0.1; 8]).unwrap();
        let rs = RatioSample::new(&data, &eta).unwrap();
        let mut tau = vec![1.5];
        tau.extend(theta.iter().map(|t| t * 0.8));
        let pairs = [
            LinkPair::default(),
            LinkPair::reversed(),
            LinkPair::new(Link::Power(0.5), Link::Power(-1.0)).unwrap(),
        ];
        for f in [Generator::Kl, Generator::Chi, Generator::Js] {
            for links in &pairs {
                let mut g = vec![0.0; 9];
                rs.separable(&m, &tau, &f, links, Some(&mut g)).unwrap();
                let fd = finite_difference_gradient(
                    |t| rs.separable(&m, t, &f, links, None).unwrap(),
                    &tau,
                    1e-6,
                );
                assert!(max_rel_err(&g, &fd) < 1e-6, "{f:?} {links:?}");
            }
        }
        let mut g = vec![0.0; 9];
        rs.skl(&m, &tau, Some(&mut g)).unwrap();
        let fd = finite_difference_gradient(|t| rs.skl(&m, t, None).unwrap(), &tau, 1e-6);
        assert!(max_rel_err(&g, &fd) < 1e-6);
    }

    #[test]
    fn nonpositive_density_rejected() {
        let m = PoissonModel::default();
        let tau = Tau::new(0.0, vec![0.0]).unwrap();
        let r = skl_loss(
            &ExtendedModel::new(&m),
            &tau,
            &poisson_data(),
            &Constant(0.0),
        );
        assert!(matches!(r, Err(Error::NonpositiveDensity { .. })));
    }
}
