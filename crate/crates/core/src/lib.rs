//! Self density-ratio matching estimators (SDRME) for unnormalized
//! statistical models.
//!
//! A model `p(x; θ)` with an unknown normalizer is extended to
//! `q(x; τ) = e^{-c} p(x; θ)` and fitted by driving the ratio
//! `w = q / η̂` to one, where `η̂` is a nonparametric density estimate of the
//! data. The crate also provides the usual baselines (NCE, Monte Carlo MLE,
//! exact MLE), plug-in variance estimates and a replication harness.
//!
//! ```
//! use sdrme::{bregman::Generator, estimators, models::{sample_discrete_exact, PoissonModel}};
//! use sdrme::nonparam::EmpiricalPmf;
//!
//! let model = PoissonModel::default();
//! let data = sample_discrete_exact(&model, &[2f64.ln()], 500, 1).unwrap();
//! let eta = EmpiricalPmf::new(&data);
//! let fit = estimators::fit_sdrme_separable(
//!     &model, &data, &eta, &Generator::Kl, &Default::default(), &Default::default(),
//! ).unwrap();
//! assert!((fit.theta()[0] - 2f64.ln()).abs() < 0.2);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod asymptotics;
pub mod bench;
pub mod bregman;
pub mod cli;
pub mod density;
pub mod error;
pub mod estimators;
pub mod model;
pub mod models;
pub mod nonparam;
pub mod numerics;
pub mod space;

pub use density::{DensityEstimate, ETA_FLOOR};
pub use error::{Error, Result};
pub use model::{density_ratio, ExtendedModel, ScaledModel, Tau, UnnormalizedModel};
pub use space::{Dataset, SampleSpace};
