//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdrme::asymptotics::{efficient_report, sandwich_misspecified};
use sdrme::bench::{
    run_experiment, EstimatorKind, EstimatorSpec, ExperimentOutput, ExperimentSpec, ModelSpec,
    TrialStatus,
};
use sdrme::bregman::{
    certify_convexity, default_certification_grid, ns_gamma_loss_grad, sdrme_separable_loss_grad,
    skl_loss_grad, Certificate, GammaConfig, Generator, Link, LinkPair,
};
use sdrme::density::ModelDensity;
use sdrme::estimators::{
    draw_auxiliary, fit_sdrme_gamma, fit_sdrme_separable, mc_mle_loss, nce_loss, FitConfig,
};
use sdrme::models::{
    sample_discrete_exact, sample_gengamma, AuxiliaryDistribution, DiscreteDistribution, FlidModel,
    GenGammaModel, HalfNormal, PoissonModel, ProductBernoulli, RbmModel,
};
use sdrme::nonparam::{EmpiricalPmf, KdeEstimate};
use sdrme::numerics::{finite_difference_gradient, max_rel_err};
use sdrme::{Dataset, DensityEstimate, ExtendedModel, ScaledModel, Tau, UnnormalizedModel};

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }

    fn run(&mut self, id: &str, f: impl FnOnce(&mut Gate) -> Result<(), String>) {
        let start = Instant::now();
        if let Err(e) = f(self) {
            self.check(id, false, format!("error: {e}"));
        }
        eprintln!("  [{id} took {:.1}s]", start.elapsed().as_secs_f64());
    }
}

fn spec(
    name: &str,
    model: ModelSpec,
    estimators: Vec<EstimatorSpec>,
    sizes: Vec<usize>,
    reps: usize,
) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        model,
        estimators,
        sample_sizes: sizes,
        replications: reps,
        seed: 1,
        metric: None,
        fit: FitConfig::default(),
    }
}

fn timed(spec: &ExperimentSpec) -> Result<(ExperimentOutput, Duration), String> {
    let start = Instant::now();
    let out = run_experiment(spec, None).map_err(|e| e.to_string())?;
    Ok((out, start.elapsed()))
}

fn mean(out: &ExperimentOutput, est: &str, n: usize) -> Result<f64, String> {
    out.summary
        .row(est, n)
        .and_then(|r| r.mean)
        .ok_or_else(|| format!("no mean for {est} at n={n}"))
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

fn poisson() -> ModelSpec {
    ModelSpec::Poisson {
        theta: 2f64.ln(),
        x_max: 60,
        aux_max: 30,
    }
}

fn efficiency(g: &mut Gate) -> Result<(), String> {
    use EstimatorKind::*;
    let n = 2000;
    let s = spec(
        "efficiency",
        poisson(),
        vec![SKl, SJs, NsGamma, Mle]
            .into_iter()
            .map(EstimatorSpec::new)
            .collect(),
        vec![n],
        400,
    );
    let (out, elapsed) = timed(&s)?;
    let truth = 2f64.ln();
    let var_of = |label: &str| {
        let z: Vec<f64> = out
            .trials
            .iter()
            .filter(|t| t.estimator == label && t.status == TrialStatus::Ok)
            .map(|t| (n as f64).sqrt() * (t.theta_hat[0] - truth))
            .collect();
        sample_variance(&z)
    };
    let mle = var_of("MLE");
    let mut parts = Vec::new();
    let mut pass = true;
    for label in ["s-KL", "s-JS", "ns-gamma"] {
        let v = var_of(label);
        let ok = (v / 0.5 - 1.0).abs() <= 0.2 && (v / mle - 1.0).abs() <= 0.1;
        pass &= ok;
        parts.push(format!("{label} {v:.3}"));
    }
    pass &= elapsed <= Duration::from_secs(120);
    g.check(
        "criterion 1 (efficiency)",
        pass,
        format!(
            "var √n(θ̂−θ*): {}, MLE {mle:.3}; bound 0.5 ±20%, MLE ±10%; {:.1}s ≤ 120s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    );
    Ok(())
}

fn gengamma(g: &mut Gate) -> Result<(), String> {
    use EstimatorKind::*;
    let s = spec(
        "gengamma",
        ModelSpec::Gengamma {
            theta1: 1.3,
            theta2: 1.3,
        },
        vec![EstimatorSpec::new(SKl), EstimatorSpec::new(Nce)],
        vec![500, 2000],
        100,
    );
    let (out, elapsed) = timed(&s)?;
    let mut pass = elapsed <= Duration::from_secs(15 * 60);
    let mut parts = Vec::new();
    for n in [500, 2000] {
        let skl = mean(&out, "s-KL", n)?;
        let nce = mean(&out, "NCE", n)?;
        pass &= (50.0..=95.0).contains(&skl) && nce / skl >= 2.0;
        parts.push(format!("n={n}: s-KL {skl:.1}, NCE/s-KL {:.2}", nce / skl));
    }
    g.check(
        "criterion 2 (generalized gamma)",
        pass,
        format!(
            "{}; need s-KL in [50, 95], ratio ≥ 2; {:.0}s ≤ 900s",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    );
    Ok(())
}

fn rbm(g: &mut Gate) -> Result<(), String> {
    use EstimatorKind::*;
    let s = spec(
        "rbm",
        ModelSpec::Rbm {
            d_v: 10,
            d_h: 2,
            weight_range: 1.0,
        },
        vec![
            EstimatorSpec::new(SKl),
            EstimatorSpec::new(Nce).with_kappa(1.0),
            EstimatorSpec::new(Mle),
        ],
        vec![1000],
        20,
    );
    let (out, elapsed) = timed(&s)?;
    let skl = mean(&out, "s-KL", 1000)?;
    let nce = mean(&out, "NCE", 1000)?;
    let mle = mean(&out, "MLE", 1000)?;
    let pass = skl / mle <= 1.5 && mle / skl <= 1.5 && nce > skl && elapsed.as_secs() <= 600;
    g.check(
        "criterion 3 (RBM)",
        pass,
        format!(
            "n·KL s-KL {skl:.2}, MLE {mle:.2}, NCE {nce:.2}; s-KL/MLE {:.2} ≤ 1.5, NCE > s-KL; {:.0}s ≤ 600s",
            skl / mle,
            elapsed.as_secs_f64()
        ),
    );
    Ok(())
}

fn specification(g: &mut Gate) -> Result<(), String> {
    use EstimatorKind::*;
    let n = 1000;
    let start = Instant::now();
    let well = spec(
        "well",
        poisson(),
        vec![SKl, SChi, SJs, NsGamma, Mle]
            .into_iter()
            .map(EstimatorSpec::new)
            .collect(),
        vec![n],
        100,
    );
    let (out, _) = timed(&well)?;
    let labels = ["s-KL", "s-Chi", "s-JS", "ns-gamma", "MLE"];
    let means: Vec<f64> = labels
        .iter()
        .map(|l| mean(&out, l, n))
        .collect::<Result<_, _>>()?;
    let max = means.iter().copied().fold(f64::MIN, f64::max);
    let min = means.iter().copied().fold(f64::MAX, f64::min);
    let well_ok = max / min <= 1.25;

    let mis = spec(
        "misspecified",
        ModelSpec::PoissonMisspecified {
            x_max: 60,
            aux_max: 30,
        },
        vec![SKl, SJs, Mle]
            .into_iter()
            .map(EstimatorSpec::new)
            .collect(),
        vec![n],
        100,
    );
    let (out, _) = timed(&mis)?;
    let skl = mean(&out, "s-KL", n)?;
    let sjs = mean(&out, "s-JS", n)?;
    let mle = mean(&out, "MLE", n)?;
    let elapsed = start.elapsed();
    let mis_ok = (skl / mle - 1.0).abs() <= 0.15 && sjs >= 1.2 * mle;
    let shown: Vec<String> = labels
        .iter()
        .zip(&means)
        .map(|(l, m)| format!("{l} {m:.3}"))
        .collect();
    g.check(
        "criterion 4 (well vs misspecified Poisson)",
        well_ok && mis_ok && elapsed.as_secs() <= 300,
        format!(
            "well: {} (max/min {:.2} ≤ 1.25); misspecified: s-KL/MLE {:.3} (±15%), s-JS/MLE {:.3} (≥ 1.2); {:.0}s ≤ 300s",
            shown.join(", "),
            max / min,
            skl / mle,
            sjs / mle,
            elapsed.as_secs_f64()
        ),
    );
    Ok(())
}

fn certification(g: &mut Gate) -> Result<(), String> {
    let grid = default_certification_grid();
    let kl = certify_convexity(&Generator::Kl, &grid);
    let js = certify_convexity(&Generator::Js, &grid);
    let chi = certify_convexity(&Generator::Chi, &grid);
    let chi_ok = matches!(chi, Certificate::NotCertified { witness, .. } if witness < 0.5);
    g.check(
        "criterion 5 (convexity certificate)",
        kl == Certificate::Convex && js == Certificate::Convex && chi_ok,
        format!("KL {kl}, JS {js}, Chi {chi}"),
    );
    Ok(())
}

type Case = (Box<dyn UnnormalizedModel>, Vec<f64>, Dataset);

/// A random model, a θ for it and 200 draws at that θ.
fn random_case(rng: &mut ChaCha8Rng) -> Result<Case, String> {
    let seed = rng.random::<u64>();
    let e = |e: sdrme::Error| e.to_string();
    Ok(match rng.random_range(0..4) {
        0 => {
            let m = PoissonModel::default();
            let theta = vec![rng.random_range(-0.5..1.5)];
            let data = sample_discrete_exact(&m, &theta, 200, seed).map_err(e)?;
            (Box::new(m), theta, data)
        }
        1 => {
            let theta = vec![rng.random_range(0.5..2.0), rng.random_range(0.2..2.0)];
            let data = sample_gengamma(theta[0], theta[1], 200, seed).map_err(e)?;
            (Box::new(GenGammaModel), theta, data)
        }
        2 => {
            let m = RbmModel::new(4, 2);
            let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let data = sample_discrete_exact(&m, &theta, 200, seed).map_err(e)?;
            (Box::new(m), theta, data)
        }
        _ => {
            let m = FlidModel::new(5, 2);
            let theta: Vec<f64> = (0..15).map(|_| rng.random_range(0.0..1.0)).collect();
            let data = sample_discrete_exact(&m, &theta, 200, seed).map_err(e)?;
            (Box::new(m), theta, data)
        }
    })
}

fn gradients(g: &mut Gate) -> Result<(), String> {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut note = |name: &str, err: f64| {
        if err > worst || !err.is_finite() {
            worst = if err.is_finite() { err } else { f64::INFINITY };
            worst_at = name.to_string();
        }
    };
    let e = |e: sdrme::Error| e.to_string();
    let separable = [
        (Generator::Kl, LinkPair::default()),
        (Generator::Chi, LinkPair::default()),
        (Generator::Js, LinkPair::default()),
        (Generator::Kl, LinkPair::reversed()),
        (
            Generator::Js,
            LinkPair::new(Link::Power(0.5), Link::Identity).map_err(e)?,
        ),
    ];
    for _ in 0..100 {
        let (model, theta, data) = random_case(&mut rng)?;
        let model = model.as_ref();
        // Evaluate away from the truth so no gradient is trivially zero.
        let theta: Vec<f64> = theta
            .iter()
            .map(|t| t + rng.random_range(-0.1..0.1))
            .collect();
        let mut tau = vec![rng.random_range(-1.0..1.0)];
        tau.extend_from_slice(&theta);
        let ext = ExtendedModel::new(model);
        let eta: Box<dyn DensityEstimate> = if model.is_discrete() {
            Box::new(EmpiricalPmf::new(&data))
        } else {
            Box::new(KdeEstimate::fit(&data, 2).map_err(e)?)
        };

        // Model score.
        let x = data.point(0);
        let mut score = vec![0.0; theta.len()];
        model.grad_log_p(x, &theta, &mut score);
        let fd = finite_difference_gradient(|t| model.log_p(x, t), &theta, H);
        note(&format!("{} score", model.name()), max_rel_err(&score, &fd));

        // Exact log normalizer.
        if let Ok(log_z) = model.exact_log_normalizer(&theta) {
            if log_z.is_finite() {
                let mut gz = vec![0.0; theta.len()];
                model
                    .grad_exact_log_normalizer(&theta, &mut gz)
                    .map_err(e)?;
                let fd = finite_difference_gradient(
                    |t| model.exact_log_normalizer(t).unwrap_or(f64::NAN),
                    &theta,
                    H,
                );
                note(&format!("{} log Z", model.name()), max_rel_err(&gz, &fd));
            }
        }

        // s-KL and separable losses.
        let t = Tau::from_slice(&tau);
        let (_, grad) = skl_loss_grad(&ext, &t, &data, eta.as_ref()).map_err(e)?;
        let fd = finite_difference_gradient(
            |v| {
                skl_loss_grad(&ext, &Tau::from_slice(v), &data, eta.as_ref())
                    .map(|r| r.0)
                    .unwrap_or(f64::NAN)
            },
            &tau,
            H,
        );
        note(&format!("{} s-KL", model.name()), max_rel_err(&grad, &fd));
        for (f, links) in &separable {
            let (_, grad) =
                sdrme_separable_loss_grad(&ext, &t, &data, eta.as_ref(), f, links).map_err(e)?;
            let fd = finite_difference_gradient(
                |v| {
                    sdrme_separable_loss_grad(
                        &ext,
                        &Tau::from_slice(v),
                        &data,
                        eta.as_ref(),
                        f,
                        links,
                    )
                    .map(|r| r.0)
                    .unwrap_or(f64::NAN)
                },
                &tau,
                H,
            );
            note(
                &format!("{} separable {}", model.name(), f.name()),
                max_rel_err(&grad, &fd),
            );
        }

        // ns-γ over θ.
        for cfg in [
            GammaConfig::standard(),
            GammaConfig::new(-0.01, 0.99, 1.01).map_err(e)?,
        ] {
            let (_, grad) =
                ns_gamma_loss_grad(model, &theta, &data, eta.as_ref(), &cfg).map_err(e)?;
            let fd = finite_difference_gradient(
                |v| {
                    ns_gamma_loss_grad(model, v, &data, eta.as_ref(), &cfg)
                        .map(|r| r.0)
                        .unwrap_or(f64::NAN)
                },
                &theta,
                H,
            );
            note(
                &format!("{} ns-gamma", model.name()),
                max_rel_err(&grad, &fd),
            );
        }

        // NCE and Monte Carlo MLE with auxiliary draws held fixed.
        let aux: Box<dyn AuxiliaryDistribution> = match model.name() {
            "poisson" => Box::new(
                DiscreteDistribution::uniform(1, (0..=60).map(f64::from).collect()).map_err(e)?,
            ),
            "gengamma" => Box::new(HalfNormal::matched_to(&data).map_err(e)?),
            "rbm" => Box::new(spin_uniform(data.dim()).map_err(e)?),
            _ => Box::new(ProductBernoulli::new(vec![0.5; data.dim()]).map_err(e)?),
        };
        let aux = aux.as_ref();
        let noise = draw_auxiliary(aux, data.n(), 2.0, rng.random::<u64>()).map_err(e)?;
        let mut grad = vec![0.0; tau.len()];
        nce_loss(model, &data, &noise, aux, 2.0, &tau, &mut grad).map_err(e)?;
        let mut scratch = vec![0.0; tau.len()];
        let fd = finite_difference_gradient(
            |v| nce_loss(model, &data, &noise, aux, 2.0, v, &mut scratch).unwrap_or(f64::NAN),
            &tau,
            H,
        );
        note(&format!("{} NCE", model.name()), max_rel_err(&grad, &fd));
        let mut grad = vec![0.0; theta.len()];
        mc_mle_loss(model, &data, &noise, aux, &theta, &mut grad).map_err(e)?;
        let mut scratch = vec![0.0; theta.len()];
        let fd = finite_difference_gradient(
            |v| mc_mle_loss(model, &data, &noise, aux, v, &mut scratch).unwrap_or(f64::NAN),
            &theta,
            H,
        );
        note(&format!("{} MC-MLE", model.name()), max_rel_err(&grad, &fd));
    }
    g.check(
        "criterion 6 (gradient suite)",
        worst <= 1e-6,
        format!("100 configurations, worst rel. err {worst:.2e} ({worst_at}) ≤ 1e-6"),
    );
    Ok(())
}

fn spin_uniform(d: usize) -> sdrme::Result<DiscreteDistribution> {
    let mut points = Vec::new();
    for code in 0..(1u32 << d) {
        for j in 0..d {
            points.push(if code >> j & 1 == 1 { 1.0 } else { -1.0 });
        }
    }
    DiscreteDistribution::uniform(d, points)
}

fn scale_invariance(g: &mut Gate) -> Result<(), String> {
    let e = |e: sdrme::Error| e.to_string();
    let base: Arc<dyn UnnormalizedModel> = Arc::new(PoissonModel::default());
    let data = sample_discrete_exact(base.as_ref(), &[2f64.ln()], 1000, 5).map_err(e)?;
    let eta = EmpiricalPmf::new(&data);
    let cfg = GammaConfig::new(0.01, -1.0, 1.01).map_err(e)?;
    let reference =
        fit_sdrme_gamma(base.as_ref(), &data, &eta, &cfg, &FitConfig::default()).map_err(e)?;
    let mut pass = true;
    let mut shown = vec![format!("λ=1 {:?}", reference.theta()[0])];
    for lambda in [0.1, 7.0] {
        let scaled = ScaledModel::new(base.clone(), lambda).map_err(e)?;
        let fit = fit_sdrme_gamma(&scaled, &data, &eta, &cfg, &FitConfig::default()).map_err(e)?;
        pass &= fit.theta()[0].to_bits() == reference.theta()[0].to_bits();
        shown.push(format!("λ={lambda} {:?}", fit.theta()[0]));
    }
    g.check(
        "criterion 7 (ns-gamma scale invariance)",
        pass,
        format!("θ̂ bit-identical: {}", shown.join(", ")),
    );
    Ok(())
}

fn sandwich(g: &mut Gate) -> Result<(), String> {
    let e = |e: sdrme::Error| e.to_string();
    let start = Instant::now();
    let model = PoissonModel::default();
    let data = sample_discrete_exact(&model, &[2f64.ln()], 1000, 8).map_err(e)?;
    let fit = fit_sdrme_separable(
        &model,
        &data,
        &EmpiricalPmf::new(&data),
        &Generator::Kl,
        &LinkPair::default(),
        &FitConfig::default(),
    )
    .map_err(e)?;
    let tau = fit.tau().ok_or("no τ")?;
    let ext = ExtendedModel::new(&model);
    let eta = ModelDensity::new(&model, &tau.to_vec());
    let sw = sandwich_misspecified(&ext, &tau, &data, &eta).map_err(e)?;
    let eff = efficient_report(&ext, &tau, &data).map_err(e)?;
    let gap = (&sw.theta_block_inverse - &eff.theta_block_inverse).amax();

    let s = spec(
        "coverage",
        poisson(),
        vec![EstimatorSpec::new(EstimatorKind::SKl)],
        vec![1000],
        400,
    );
    let (out, _) = timed(&s)?;
    let truth = 2f64.ln();
    let mut covered = 0usize;
    let mut total = 0usize;
    for t in out.trials.iter().filter(|t| t.status == TrialStatus::Ok) {
        if let Some(se) = &t.standard_errors {
            total += 1;
            if (t.theta_hat[0] - truth).abs() <= 1.96 * se[0] {
                covered += 1;
            }
        }
    }
    let coverage = covered as f64 / total.max(1) as f64;
    let elapsed = start.elapsed();
    g.check(
        "criterion 8 (sandwich collapse and coverage)",
        gap <= 1e-10
            && total == 400
            && (coverage - 0.95).abs() <= 0.03
            && elapsed.as_secs() <= 120,
        format!(
            "max |sandwich − Ω̂⁻¹| on θ-block {gap:.1e} ≤ 1e-10; coverage {covered}/{total} = {coverage:.3} (0.95 ± 0.03); {:.1}s ≤ 120s",
            elapsed.as_secs_f64()
        ),
    );
    Ok(())
}

/// `p(x; θ) = exp(θ x)` on `{0, 1}`.
struct TwoState;

impl UnnormalizedModel for TwoState {
    fn name(&self) -> &str {
        "two-state"
    }
    fn dim_theta(&self) -> usize {
        1
    }
    fn dim_x(&self) -> usize {
        1
    }
    fn is_discrete(&self) -> bool {
        true
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        theta[0] * x[0]
    }
    fn grad_log_p(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }
    fn enumeration_size(&self) -> Option<u128> {
        Some(2)
    }
    fn for_each_point(&self, visit: &mut dyn FnMut(&[f64])) -> sdrme::Result<()> {
        visit(&[0.0]);
        visit(&[1.0]);
        Ok(())
    }
}

/// Minimizes `f` over a box by repeated 41-point-per-axis grids, each
/// zoomed onto the best cell of the last.
fn grid_search(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    const K: usize = 41;
    let d = lo.len();
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut best = lo.clone();
    for _ in 0..12 {
        let mut best_v = f64::INFINITY;
        let mut idx = vec![0usize; d];
        loop {
            let p: Vec<f64> = (0..d)
                .map(|j| lo[j] + (hi[j] - lo[j]) * idx[j] as f64 / (K - 1) as f64)
                .collect();
            let v = f(&p);
            if v < best_v {
                best_v = v;
                best = p;
            }
            let mut j = 0;
            while j < d {
                idx[j] += 1;
                if idx[j] < K {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == d {
                break;
            }
        }
        for j in 0..d {
            let cell = (hi[j] - lo[j]) / (K - 1) as f64;
            lo[j] = best[j] - 2.0 * cell;
            hi[j] = best[j] + 2.0 * cell;
        }
    }
    best
}

fn oracle(g: &mut Gate) -> Result<(), String> {
    let e = |e: sdrme::Error| e.to_string();
    let model = TwoState;
    let ext = ExtendedModel::new(&model);
    let mut values = vec![0.0; 7];
    values.extend(vec![1.0; 13]);
    let data = Dataset::from_scalars(values).map_err(e)?;
    // Fixed density away from the data proportions (0.35, 0.65).
    let eta = DiscreteDistribution::new(1, vec![0.0, 1.0], &[0.3, 0.7]).map_err(e)?;
    let cfg = FitConfig::default().with_tolerance(1e-12);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (f, links) in [
        (Generator::Kl, LinkPair::default()),
        (Generator::Chi, LinkPair::default()),
        (Generator::Js, LinkPair::default()),
        (Generator::Kl, LinkPair::reversed()),
    ] {
        let fit = fit_sdrme_separable(&model, &data, &eta, &f, &links, &cfg).map_err(e)?;
        let loss = |v: &[f64]| {
            sdrme_separable_loss_grad(&ext, &Tau::from_slice(v), &data, &eta, &f, &links)
                .map(|r| r.0)
                .unwrap_or(f64::INFINITY)
        };
        let best = grid_search(&loss, &[-3.0, -3.0], &[3.0, 3.0]);
        let gap = fit
            .params
            .iter()
            .zip(&best)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
        parts.push(format!("{} {gap:.1e}", f.name()));
    }
    for cfg_g in [
        GammaConfig::standard(),
        GammaConfig::new(-0.01, 0.99, 1.01).map_err(e)?,
    ] {
        let fit = fit_sdrme_gamma(&model, &data, &eta, &cfg_g, &cfg).map_err(e)?;
        let loss = |v: &[f64]| {
            ns_gamma_loss_grad(&model, v, &data, &eta, &cfg_g)
                .map(|r| r.0)
                .unwrap_or(f64::INFINITY)
        };
        let best = grid_search(&loss, &[-3.0], &[3.0]);
        let gap = (fit.theta()[0] - best[0]).abs();
        worst = worst.max(gap);
        parts.push(format!("ns-gamma {gap:.1e}"));
    }
    g.check(
        "criterion 9 (grid-search oracle)",
        worst <= 1e-4,
        format!("|fit − grid| {} ≤ 1e-4", parts.join(", ")),
    );
    Ok(())
}

fn flid(g: &mut Gate) -> Result<(), String> {
    let s = spec(
        "flid",
        ModelSpec::Flid { v: 8, l: 2 },
        vec![
            EstimatorSpec::new(EstimatorKind::SKl),
            EstimatorSpec::new(EstimatorKind::Nce),
        ],
        vec![20_000],
        10,
    );
    let (out, elapsed) = timed(&s)?;
    let skl = mean(&out, "s-KL", 20_000)?;
    let nce = mean(&out, "NCE", 20_000)?;
    g.check(
        "FLID desk check",
        skl <= nce,
        format!(
            "n·KL s-KL {skl:.2} ≤ NCE {nce:.2}; {:.0}s",
            elapsed.as_secs_f64()
        ),
    );
    Ok(())
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    gate.run("criterion 1 (efficiency)", efficiency);
    gate.run("criterion 2 (generalized gamma)", gengamma);
    gate.run("criterion 3 (RBM)", rbm);
    gate.run("criterion 4 (well vs misspecified Poisson)", specification);
    gate.run("criterion 5 (convexity certificate)", certification);
    gate.run("criterion 6 (gradient suite)", gradients);
    gate.run("criterion 7 (ns-gamma scale invariance)", scale_invariance);
    gate.run("criterion 8 (sandwich collapse and coverage)", sandwich);
    gate.run("criterion 9 (grid-search oracle)", oracle);
    gate.run("FLID desk check", flid);
    println!("{} criteria failed", gate.failures);
    if gate.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
