//! Fitting routines: separable and ns-γ SDRME, NCE, Monte Carlo MLE and
//! exact MLE, all driven by one deterministic quasi-Newton optimizer.

mod contrastive;
mod mle;
mod optimizer;
mod sdrme;

pub use contrastive::{
    draw_auxiliary, fit_mc_mle, fit_mc_mle_joint, fit_nce, mc_mle_loss, nce_loss,
};
pub use mle::fit_exact_mle;
pub use optimizer::{minimize, FitConfig, FitResult, Objective, Optimizer};
pub use sdrme::{fit_sdrme_gamma, fit_sdrme_gamma_on, fit_sdrme_separable, fit_sdrme_separable_on};
