use crate::error::{Error, Result};
use crate::model::UnnormalizedModel;
use crate::space::Dataset;

use super::optimizer::{minimize, FitConfig, FitResult};
use super::sdrme::starting_theta;

/// Exact MLE: minimizes `-(1/n) Σ [log p(x_i; θ) - log Z(θ)]`.
pub fn fit_exact_mle(
    model: &dyn UnnormalizedModel,
    data: &Dataset,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let theta0 = starting_theta(model, cfg)?;
    model.exact_log_normalizer(&theta0)?;
    let xs = data.compress();
    let n = xs.total();
    let d = model.dim_theta();
    let mut score = vec![0.0; d];
    let mut grad_z = vec![0.0; d];
    let mut objective = |theta: &[f64], g: &mut [f64]| -> Result<f64> {
        let log_z = model.exact_log_normalizer(theta)?;
        if !log_z.is_finite() {
            return Err(Error::Domain("normalizer diverges".into()));
        }
        model.grad_exact_log_normalizer(theta, &mut grad_z)?;
        g.copy_from_slice(&grad_z);
        let mut total = 0.0;
        for (x, m) in xs.iter() {
            total += m * model.log_p(x, theta);
            model.grad_log_p(x, theta, &mut score);
            for (gj, sj) in g.iter_mut().zip(&score) {
                *gj -= m * sj / n;
            }
        }
        Ok(log_z - total / n)
    };
    minimize(&mut objective, &theta0, cfg, false)
}
