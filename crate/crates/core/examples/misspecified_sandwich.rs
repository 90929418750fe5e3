//! Poisson fitted to non-Poisson counts. The efficient standard error
//! assumes the model is right; the sandwich does not.
//!
//! cargo run --release --example misspecified_sandwich

use sdrme::asymptotics::{efficient_report, sandwich_misspecified};
use sdrme::bregman::{Generator, LinkPair};
use sdrme::estimators::{fit_sdrme_separable, FitConfig};
use sdrme::models::{misspecified_truth_pmf, rng_for, PoissonModel};
use sdrme::nonparam::EmpiricalPmf;
use sdrme::ExtendedModel;

fn main() -> sdrme::Result<()> {
    let truth = misspecified_truth_pmf(60)?;
    let data = truth.sample_n(2000, &mut rng_for(11, 0))?;
    let model = PoissonModel::default();
    let eta = EmpiricalPmf::new(&data);
    let fit = fit_sdrme_separable(
        &model,
        &data,
        &eta,
        &Generator::Kl,
        &LinkPair::default(),
        &FitConfig::default(),
    )?;
    let tau = fit.tau().expect("s-KL fits c");
    let ext = ExtendedModel::new(&model);

    let eff = efficient_report(&ext, &tau, &data)?;
    let sw = sandwich_misspecified(&ext, &tau, &data, &eta)?;
    println!("θ̂ = {:.5}", fit.theta()[0]);
    println!("efficient se {:.5}", eff.standard_errors[0]);
    println!("sandwich  se {:.5}", sw.standard_errors[0]);
    Ok(())
}
