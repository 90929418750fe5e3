//! Convex generators, link functions, Bregman-divergence losses and the
//! convexity certificate.

mod convexity;
mod gamma;
mod generator;
mod links;
mod loss;

pub use convexity::{
    certify_convexity, convexity_expression, default_certification_grid, Certificate,
};
pub use gamma::{ns_gamma_loss, ns_gamma_loss_grad, ns_ps_loss, GammaConfig};
pub use generator::{generator_value, separable_bregman_pointwise, CustomGenerator, Generator};
pub use links::{Link, LinkPair};
pub use loss::{
    sdrme_separable_loss, sdrme_separable_loss_grad, skl_loss, skl_loss_grad, RatioSample,
};
