//! Nonparametric plug-in densities: empirical and regularized pmfs, and a
//! high-order kernel density estimator with likelihood cross-validation.

mod kde;
mod pmf;

pub use kde::{
    default_bandwidth_grid, kde_eval, kernel, loo_log_likelihood, select_bandwidth_cv, KdeEstimate,
};
pub use pmf::{empirical_pmf_eval, EmpiricalPmf, Pmf, RegularizedPmf};
