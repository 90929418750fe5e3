//! The plug-in density interface `η̂(x)`.

use crate::model::{ExtendedModel, UnnormalizedModel};

/// Lower bound applied to every density estimate.
pub const ETA_FLOOR: f64 = 1e-12;

/// A nonparametric (or fixed) density evaluable at any sample point.
pub trait DensityEstimate: Send + Sync {
    /// `η̂(x)`, floored at [`ETA_FLOOR`].
    fn eval(&self, x: &[f64]) -> f64;

    fn log_eval(&self, x: &[f64]) -> f64 {
        self.eval(x).ln()
    }
}

/// Uses `q(·; τ)` itself as the density, so every ratio is exactly 1.
pub struct ModelDensity<'a> {
    model: ExtendedModel<'a>,
    tau: Vec<f64>,
}

impl<'a> ModelDensity<'a> {
    pub fn new(base: &'a dyn UnnormalizedModel, tau: &[f64]) -> Self {
        ModelDensity {
            model: ExtendedModel::new(base),
            tau: tau.to_vec(),
        }
    }
}

impl DensityEstimate for ModelDensity<'_> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.log_eval(x).exp().max(ETA_FLOOR)
    }

    fn log_eval(&self, x: &[f64]) -> f64 {
        self.model.log_q(x, &self.tau).max(ETA_FLOOR.ln())
    }
}

/// Normalized `p(x; θ) / Z(θ)` of a model with an exact normalizer.
pub struct NormalizedModelDensity<'a> {
    model: &'a dyn UnnormalizedModel,
    theta: Vec<f64>,
    log_z: f64,
}

impl<'a> NormalizedModelDensity<'a> {
    pub fn new(model: &'a dyn UnnormalizedModel, theta: &[f64]) -> crate::Result<Self> {
        let log_z = model.exact_log_normalizer(theta)?;
        Ok(NormalizedModelDensity {
            model,
            theta: theta.to_vec(),
            log_z,
        })
    }
}

impl DensityEstimate for NormalizedModelDensity<'_> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.log_eval(x).exp().max(ETA_FLOOR)
    }

    fn log_eval(&self, x: &[f64]) -> f64 {
        (self.model.log_p(x, &self.theta) - self.log_z).max(ETA_FLOOR.ln())
    }
}
