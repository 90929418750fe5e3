//! ns-γ never sees the scale of p: multiplying the model by λ leaves θ̂
//! unchanged to the last bit.
//!
//! cargo run --example scale_invariance

use std::sync::Arc;

use sdrme::bregman::GammaConfig;
use sdrme::estimators::{fit_sdrme_gamma, FitConfig};
use sdrme::models::{sample_discrete_exact, PoissonModel};
use sdrme::nonparam::EmpiricalPmf;
use sdrme::{ScaledModel, UnnormalizedModel};

fn main() -> sdrme::Result<()> {
    let base: Arc<dyn UnnormalizedModel> = Arc::new(PoissonModel::default());
    let data = sample_discrete_exact(base.as_ref(), &[2f64.ln()], 1000, 1)?;
    let eta = EmpiricalPmf::new(&data);
    let cfg = GammaConfig::standard();
    for lambda in [1.0, 0.1, 7.0, 1e6] {
        let model = ScaledModel::new(base.clone(), lambda)?;
        let fit = fit_sdrme_gamma(&model, &data, &eta, &cfg, &FitConfig::default())?;
        println!(
            "λ = {lambda:<8} θ̂ = {:.17}  bits {:016x}",
            fit.theta()[0],
            fit.theta()[0].to_bits()
        );
    }
    Ok(())
}
