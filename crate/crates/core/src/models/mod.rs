//! Models used by the experiments: Poisson, generalized gamma, restricted
//! Boltzmann machine and FLID, plus exact samplers, tabulated truths and
//! auxiliary distributions for the contrastive baselines.

mod auxiliary;
mod discrete;
mod flid;
mod gengamma;
mod poisson;
mod rbm;
mod sampling;

pub use auxiliary::{AuxiliaryDistribution, HalfNormal, ProductBernoulli};
pub use discrete::{misspecified_truth_pmf, DiscreteDistribution};
pub use flid::FlidModel;
pub use gengamma::GenGammaModel;
pub use poisson::PoissonModel;
pub use rbm::{rbm_exact_normalizer, RbmModel};
pub use sampling::{rng_for, sample_discrete_exact, sample_gengamma, seed_stream};
