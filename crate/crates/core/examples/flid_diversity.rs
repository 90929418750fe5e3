//! Facility-location diversity model over subsets of 8 items. Fits s-KL on
//! the regularized pmf's mixture sample and compares exact KL to NCE.
//!
//! cargo run --release --example flid_diversity

use rand::Rng;

use sdrme::bench::exact_kl_discrete;
use sdrme::bregman::{Generator, LinkPair, RatioSample};
use sdrme::estimators::{fit_nce, fit_sdrme_separable_on, FitConfig};
use sdrme::model::model_space;
use sdrme::models::{
    rng_for, sample_discrete_exact, DiscreteDistribution, FlidModel, ProductBernoulli,
};
use sdrme::nonparam::RegularizedPmf;

fn main() -> sdrme::Result<()> {
    let model = FlidModel::new(8, 2);
    let mut rng = rng_for(3, 0);
    let theta: Vec<f64> = (0..8 * 3).map(|_| rng.random::<f64>()).collect();
    let truth = DiscreteDistribution::from_model(&model, &theta)?;
    let n = 5000;
    let data = sample_discrete_exact(&model, &theta, n, 3)?;

    let space = model_space(&model)?;
    let eta = RegularizedPmf::new(&data, &space, &mut rng_for(3, 1))?;
    let rs = RatioSample::weighted(eta.mixture_sample(&data)?, &eta)?;
    let cfg = FitConfig::default().with_seed(3);
    let skl = fit_sdrme_separable_on(&model, &rs, &Generator::Kl, &LinkPair::default(), &cfg)?;

    let aux = ProductBernoulli::matched_to(&data)?;
    let nce = fit_nce(&model, &data, &aux, 1.0, &cfg)?;

    for (name, fit) in [("s-KL", &skl), ("NCE", &nce)] {
        let kl = exact_kl_discrete(&truth, &model, fit.theta())?;
        println!(
            "{name:<5} n·KL {:.3}  ({} iterations)",
            n as f64 * kl,
            fit.iterations
        );
    }
    Ok(())
}
