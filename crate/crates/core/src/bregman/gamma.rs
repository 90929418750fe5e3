use serde::{Deserialize, Serialize};

use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::model::UnnormalizedModel;
use crate::numerics::{exact_sum, weighted_log_sum_exp, weighted_softmax};
use crate::space::Dataset;

use super::loss::RatioSample;

/// Exponents `(α, β, γ)` of the non-separable γ-divergence loss, with
/// `δ = (α + β(γ-1))/γ` derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGamma", into = "RawGamma")]
pub struct GammaConfig {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl TryFrom<RawGamma> for GammaConfig {
    type Error = Error;
    fn try_from(r: RawGamma) -> Result<Self> {
        GammaConfig::new(r.alpha, r.beta, r.gamma)
    }
}

impl From<GammaConfig> for RawGamma {
    fn from(c: GammaConfig) -> Self {
        RawGamma {
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
        }
    }
}

impl GammaConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if ![alpha, beta, gamma].iter().all(|v| v.is_finite()) {
            return Err(Error::config("alpha/beta/gamma", "must be finite"));
        }
        if alpha == beta {
            return Err(Error::config(
                "alpha",
                "alpha must differ from beta (α ≠ β)",
            ));
        }
        if !(gamma > 1.0) {
            return Err(Error::config("gamma", "gamma must exceed 1"));
        }
        let mut delta = (alpha + beta * (gamma - 1.0)) / gamma;
        // (0.01 + (-1)(0.01)) / 1.01 is -8.7e-18 in floating point.
        if delta.abs() <= 1e-12 {
            delta = 0.0;
        }
        Ok(GammaConfig {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// `α = 0.01, β = -1, γ = 1.01`, for which `δ = 0`.
    pub fn standard() -> Self {
        GammaConfig::new(0.01, -1.0, 1.01).expect("valid constants")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig::standard()
    }
}

impl RatioSample {
    /// Log-ratios `log p(x_k; θ) - log η̂(x_k)` re-centred at the first
    /// point. The centring is an exact sum, so a constant factor on `p`
    /// cancels without rounding.
    pub(crate) fn centred_log_ratios(
        &self,
        model: &dyn UnnormalizedModel,
        theta: &[f64],
    ) -> Vec<f64> {
        let (h0, o0) = model.log_p_parts(self.sample.point(0), theta);
        let le0 = self.log_eta[0];
        self.sample
            .iter()
            .zip(&self.log_eta)
            .map(|((x, _), &le)| {
                let (h, o) = model.log_p_parts(x, theta);
                exact_sum(&[h, o, -le, -h0, -o0, le0])
            })
            .collect()
    }

    /// `(1/γ) log Σ w^α + ((γ-1)/γ) log Σ w^β - log Σ w^δ` with
    /// `w = p/η̂`, over θ only.
    pub fn ns_gamma(
        &self,
        model: &dyn UnnormalizedModel,
        theta: &[f64],
        cfg: &GammaConfig,
        grad: Option<&mut [f64]>,
    ) -> Result<f64> {
        let d = self.centred_log_ratios(model, theta);
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("density ratio is zero or infinite".into()));
        }
        let m = self.sample.weights();
        let (a, b, g, de) = (cfg.alpha, cfg.beta, cfg.gamma, cfg.delta);
        let k = d.len();
        let mut sa = vec![0.0; k];
        let mut sb = vec![0.0; k];
        let mut sd = vec![0.0; k];
        let scaled = |e: f64| d.iter().map(|v| e * v).collect::<Vec<_>>();
        let la = weighted_softmax(&scaled(a), m, &mut sa);
        let lb = weighted_softmax(&scaled(b), m, &mut sb);
        let ld = if de == 0.0 {
            self.n().ln()
        } else {
            weighted_softmax(&scaled(de), m, &mut sd)
        };
        let loss = la / g + (g - 1.0) / g * lb - ld;
        if let Some(out) = grad {
            out.fill(0.0);
            let mut score = vec![0.0; theta.len()];
            for (j, (x, _)) in self.sample.iter().enumerate() {
                let coef = a / g * sa[j] + (g - 1.0) * b / g * sb[j] - de * sd[j];
                if coef == 0.0 {
                    continue;
                }
                model.grad_log_p(x, theta, &mut score);
                for (o, s) in out.iter_mut().zip(&score) {
                    *o += coef * s;
                }
            }
        }
        Ok(loss)
    }

    /// `(log T₁, log T₂)` of the pseudo-spherical form
    /// `T₁ - T₂ = (Σ w^α)^{1/γ} - (Σ w^β)^{(1-γ)/γ} Σ w^δ`.
    pub fn ns_ps_log_terms(
        &self,
        model: &dyn UnnormalizedModel,
        theta: &[f64],
        cfg: &GammaConfig,
    ) -> (f64, f64) {
        let lw: Vec<f64> = self
            .sample
            .iter()
            .zip(&self.log_eta)
            .map(|((x, _), le)| model.log_p(x, theta) - le)
            .collect();
        let m = self.sample.weights();
        let lse = |e: f64| weighted_log_sum_exp(&lw.iter().map(|v| e * v).collect::<Vec<_>>(), m);
        let g = cfg.gamma;
        let log_t1 = lse(cfg.alpha) / g;
        let log_t2 = (1.0 - g) / g * lse(cfg.beta) + lse(cfg.delta);
        (log_t1, log_t2)
    }
}

/// Non-separable γ-divergence loss over θ (no normalizing parameter).
pub fn ns_gamma_loss(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    data: &Dataset,
    eta: &dyn DensityEstimate,
    cfg: &GammaConfig,
) -> Result<f64> {
    RatioSample::new(data, eta)?.ns_gamma(model, theta, cfg, None)
}

pub fn ns_gamma_loss_grad(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    data: &Dataset,
    eta: &dyn DensityEstimate,
    cfg: &GammaConfig,
) -> Result<(f64, Vec<f64>)> {
    let mut g = vec![0.0; theta.len()];
    let v = RatioSample::new(data, eta)?.ns_gamma(model, theta, cfg, Some(&mut g))?;
    Ok((v, g))
}

/// Pseudo-spherical loss `(Σ w^α)^{1/γ} - (Σ w^β)^{(1-γ)/γ} Σ w^δ`.
pub fn ns_ps_loss(
    model: &dyn UnnormalizedModel,
    theta: &[f64],
    data: &Dataset,
    eta: &dyn DensityEstimate,
    cfg: &GammaConfig,
) -> Result<f64> {
    let (l1, l2) = RatioSample::new(data, eta)?.ns_ps_log_terms(model, theta, cfg);
    Ok(l1.exp() - l2.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScaledModel;
    use crate::models::{sample_discrete_exact, DiscreteDistribution, PoissonModel, RbmModel};
    use crate::numerics::{finite_difference_gradient, max_rel_err};
    use std::sync::Arc;

    struct Constant(f64);
    impl DensityEstimate for Constant {
        fn eval(&self, _x: &[f64]) -> f64 {
            self.0
        }
    }

    #[test]
    fn delta_derivation() {
        let c = GammaConfig::standard();
        assert_eq!(c.delta(), 0.0);
        let c = GammaConfig::new(0.5, 2.0, 2.0).unwrap();
        assert!((c.delta() - 1.25).abs() < 1e-15);
        assert!(GammaConfig::new(1.0, 1.0, 2.0).is_err());
        assert!(GammaConfig::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn constant_ratio_gives_zero() {
        let m = PoissonModel::default();
        let data = Dataset::from_scalars(vec![0.0; 5]).unwrap();
        for k in [0.5, 2.0] {
            // p(0; 0) = 1, so w = k everywhere.
            for cfg in [
                GammaConfig::standard(),
                GammaConfig::new(0.3, 1.7, 1.5).unwrap(),
            ] {
                let l = ns_gamma_loss(&m, &[0.0], &data, &Constant(1.0 / k), &cfg).unwrap();
                assert!(l.abs() < 1e-12, "k = {k}, {cfg:?}: {l}");
            }
        }
    }

    #[test]
    fn invariant_to_scaling_the_model() {
        let base: Arc<dyn UnnormalizedModel> = Arc::new(PoissonModel::default());
        let data = sample_discrete_exact(base.as_ref(), &[2f64.ln()], 400, 4).unwrap();
        let eta = DiscreteDistribution::from_model(base.as_ref(), &[0.6]).unwrap();
        let cfg = GammaConfig::standard();
        let (l0, g0) = ns_gamma_loss_grad(base.as_ref(), &[0.8], &data, &eta, &cfg).unwrap();
        for lambda in [0.1, 7.0, 1e-30] {
            let scaled = ScaledModel::new(base.clone(), lambda).unwrap();
            let (l, g) = ns_gamma_loss_grad(&scaled, &[0.8], &data, &eta, &cfg).unwrap();
            assert_eq!(l.to_bits(), l0.to_bits());
            assert_eq!(g[0].to_bits(), g0[0].to_bits());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = RbmModel::new(4, 2);
        let theta: Vec<f64> = (0..8).map(|i| 0.4 * ((i as f64) * 0.9).cos()).collect();
        let data = sample_discrete_exact(&m, &theta, 300, 2).unwrap();
        let eta = DiscreteDistribution::from_model(&m, &[0.05; 8]).unwrap();
        let rs = RatioSample::new(&data, &eta).unwrap();
        for cfg in [
            GammaConfig::standard(),
            GammaConfig::new(0.5, 1.5, 2.0).unwrap(),
        ] {
            let mut g = vec![0.0; 8];
            rs.ns_gamma(&m, &theta, &cfg, Some(&mut g)).unwrap();
            let fd = finite_difference_gradient(
                |t| rs.ns_gamma(&m, t, &cfg, None).unwrap(),
                &theta,
                1e-6,
            );
            assert!(max_rel_err(&g, &fd) < 1e-6, "{cfg:?}");
        }
    }

    #[test]
    fn ps_log_terms_match_gamma_terms() {
        let m = PoissonModel::default();
        let data = sample_discrete_exact(&m, &[1.0], 200, 5).unwrap();
        let eta = DiscreteDistribution::from_model(&m, &[0.7]).unwrap();
        let rs = RatioSample::new(&data, &eta).unwrap();
        let cfg = GammaConfig::new(0.2, -0.5, 1.3).unwrap();
        for theta in [0.2, 0.9, 1.4] {
            let (l1, l2) = rs.ns_ps_log_terms(&m, &[theta], &cfg);
            let lw = rs.log_ratios(&m, &[0.0, theta]);
            let mw = rs.sample().weights();
            let lse =
                |e: f64| weighted_log_sum_exp(&lw.iter().map(|v| e * v).collect::<Vec<_>>(), mw);
            let g1 = lse(cfg.alpha()) / cfg.gamma();
            let g2 = (cfg.gamma() - 1.0) / cfg.gamma() * lse(cfg.beta());
            let g3 = -lse(cfg.delta());
            assert!((l1 - g1).abs() < 1e-12);
            assert!((l2 + g2 + g3).abs() < 1e-12);
            let total = rs.ns_gamma(&m, &[theta], &cfg, None).unwrap();
            assert!((total - (l1 - l2)).abs() < 1e-10);
        }
    }

    #[test]
    fn ps_unit_ratio() {
        let m = PoissonModel::default();
        let data = Dataset::from_scalars(vec![0.0]).unwrap();
        let l = ns_ps_loss(&m, &[0.0], &data, &Constant(1.0), &GammaConfig::standard()).unwrap();
        assert!(l.abs() < 1e-15);
    }
}
