use serde::{Deserialize, Serialize};

use crate::bregman::{GammaConfig, Generator, Link, LinkPair};
use crate::error::{Error, Result};
use crate::estimators::FitConfig;

fn ln2() -> f64 {
    std::f64::consts::LN_2
}
fn sixty() -> usize {
    60
}
fn thirty() -> usize {
    30
}
fn one_point_three() -> f64 {
    1.3
}
fn ten() -> usize {
    10
}
fn two() -> usize {
    2
}
fn eight() -> usize {
    8
}
fn one() -> f64 {
    1.0
}

/// Data-generating model and the unnormalized family fitted to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Poisson(e^θ) truth, Poisson family.
    Poisson {
        #[serde(default = "ln2")]
        theta: f64,
        #[serde(default = "sixty")]
        x_max: usize,
        /// Auxiliary distributions are uniform over `{0..aux_max}`.
        #[serde(default = "thirty")]
        aux_max: usize,
    },
    /// Fixed non-Poisson truth, Poisson family.
    PoissonMisspecified {
        #[serde(default = "sixty")]
        x_max: usize,
        #[serde(default = "thirty")]
        aux_max: usize,
    },
    Gengamma {
        #[serde(default = "one_point_three")]
        theta1: f64,
        #[serde(default = "one_point_three")]
        theta2: f64,
    },
    /// Weights redrawn i.i.d. uniform on `[-weight_range, weight_range]`
    /// every replication.
    Rbm {
        #[serde(default = "ten")]
        d_v: usize,
        #[serde(default = "two")]
        d_h: usize,
        #[serde(default = "one")]
        weight_range: f64,
    },
    /// `u`, `w` redrawn i.i.d. uniform on `[0, 1]` every replication.
    Flid {
        #[serde(default = "eight")]
        v: usize,
        #[serde(default = "two")]
        l: usize,
    },
}

impl ModelSpec {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, ModelSpec::Gengamma { .. })
    }

    pub fn default_metric(&self) -> Metric {
        if self.is_discrete() {
            Metric::ScaledKl
        } else {
            Metric::ScaledMse
        }
    }

    /// Default plug-in density for the SDRME estimators.
    pub fn default_density(&self) -> DensityPolicy {
        match self {
            ModelSpec::Rbm { .. } => DensityPolicy::Regularized,
            ModelSpec::Gengamma { .. } => DensityPolicy::Kde,
            _ => DensityPolicy::Empirical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `n KL(η* ‖ p̂)`
    ScaledKl,
    /// `n ‖θ̂ - θ*‖²`
    ScaledMse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityPolicy {
    Empirical,
    /// Empirical pmf mixed with `1/n` of an empirical uniform sample.
    Regularized,
    Kde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "s-kl")]
    SKl,
    #[serde(rename = "s-chi")]
    SChi,
    #[serde(rename = "s-js")]
    SJs,
    /// Separable SDRME with explicit generator and links.
    #[serde(rename = "separable")]
    Separable,
    #[serde(rename = "ns-gamma")]
    NsGamma,
    #[serde(rename = "nce")]
    Nce,
    #[serde(rename = "mc-mle")]
    McMle,
    #[serde(rename = "mle")]
    Mle,
}

impl EstimatorKind {
    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase())).ok()
    }

    pub fn default_label(&self) -> &'static str {
        match self {
            EstimatorKind::SKl => "s-KL",
            EstimatorKind::SChi => "s-Chi",
            EstimatorKind::SJs => "s-JS",
            EstimatorKind::Separable => "separable",
            EstimatorKind::NsGamma => "ns-gamma",
            EstimatorKind::Nce => "NCE",
            EstimatorKind::McMle => "MC-MLE",
            EstimatorKind::Mle => "MLE",
        }
    }

    pub fn uses_density(&self) -> bool {
        matches!(
            self,
            EstimatorKind::SKl
                | EstimatorKind::SChi
                | EstimatorKind::SJs
                | EstimatorKind::Separable
                | EstimatorKind::NsGamma
        )
    }

    pub fn uses_auxiliary(&self) -> bool {
        matches!(self, EstimatorKind::Nce | EstimatorKind::McMle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Generator for `separable` (`kl`, `chi`, `js`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<Link>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h2: Option<Link>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Auxiliary-to-data sample size ratio for `nce` and `mc-mle`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_order: Option<u8>,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind) -> Self {
        EstimatorSpec {
            kind,
            label: None,
            generator: None,
            h1: None,
            h2: None,
            alpha: None,
            beta: None,
            gamma: None,
            kappa: None,
            density: None,
            kernel_order: None,
        }
    }

    pub fn gamma_config(mut self, cfg: GammaConfig) -> Self {
        self.alpha = Some(cfg.alpha());
        self.beta = Some(cfg.beta());
        self.gamma = Some(cfg.gamma());
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_density(mut self, density: DensityPolicy) -> Self {
        self.density = Some(density);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.kind.default_label().to_string())
    }

    /// Generator and links of a separable estimator.
    pub fn separable_parts(&self) -> Result<(Generator, LinkPair)> {
        let f = match self.kind {
            EstimatorKind::SKl => Generator::Kl,
            EstimatorKind::SChi => Generator::Chi,
            EstimatorKind::SJs => Generator::Js,
            EstimatorKind::Separable => {
                let name = self
                    .generator
                    .as_deref()
                    .ok_or_else(|| Error::config("generator", "required for separable"))?;
                Generator::by_name(name).ok_or_else(|| {
                    Error::config("generator", format!("unknown generator `{name}`"))
                })?
            }
            _ => return Err(Error::config("kind", "not a separable estimator")),
        };
        let default = LinkPair::default();
        let links = LinkPair::new(self.h1.unwrap_or(default.h1), self.h2.unwrap_or(default.h2))?;
        Ok((f, links))
    }

    /// `(α, β, γ)`; all three or none (the standard setting).
    pub fn gamma_parts(&self) -> Result<GammaConfig> {
        match (self.alpha, self.beta, self.gamma) {
            (None, None, None) => Ok(GammaConfig::standard()),
            (Some(a), Some(b), Some(g)) => GammaConfig::new(a, b, g),
            _ => Err(Error::config(
                "alpha",
                "alpha, beta and gamma must be given together",
            )),
        }
    }

    pub fn kappa_or_default(&self) -> f64 {
        self.kappa.unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            EstimatorKind::SKl
            | EstimatorKind::SChi
            | EstimatorKind::SJs
            | EstimatorKind::Separable => self.separable_parts().map(|_| ()),
            EstimatorKind::NsGamma => self.gamma_parts().map(|_| ()),
            EstimatorKind::Nce | EstimatorKind::McMle => {
                let k = self.kappa_or_default();
                if k > 0.0 && k.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("kappa", "must be positive"))
                }
            }
            EstimatorKind::Mle => Ok(()),
        }?;
        if let Some(o) = self.kernel_order {
            if !matches!(o, 2 | 4 | 6) {
                return Err(Error::config("kernel_order", "must be 2, 4 or 6"));
            }
        }
        Ok(())
    }
}

/// A replication study: models, estimators, sample sizes and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelSpec,
    pub estimators: Vec<EstimatorSpec>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    #[serde(default)]
    pub fit: FitConfig,
}

impl ExperimentSpec {
    pub fn metric(&self) -> Metric {
        self.metric.unwrap_or_else(|| self.model.default_metric())
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::config("replications", "must be at least 2"));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::config(
                "sample_sizes",
                "need at least one positive size",
            ));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("sample_sizes", "must be strictly ascending"));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("estimators", "need at least one estimator"));
        }
        let mut labels: Vec<String> = self.estimators.iter().map(EstimatorSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("estimators", "labels must be unique"));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            e.validate().map_err(|err| match err {
                Error::InvalidConfig { field, message } => {
                    Error::config(format!("estimators[{i}].{field}"), message)
                }
                other => other,
            })?;
        }
        if self.metric() == Metric::ScaledKl && !self.model.is_discrete() {
            return Err(Error::config("metric", "scaled_kl needs a discrete model"));
        }
        if self.metric() == Metric::ScaledMse
            && matches!(self.model, ModelSpec::PoissonMisspecified { .. })
        {
            return Err(Error::config("metric", "scaled_mse needs a true parameter"));
        }
        self.fit.validate()
    }

    /// Built-in studies: `poisson`, `poisson-misspecified`, `gengamma`,
    /// `rbm`, `flid`.
    pub fn preset(name: &str) -> Option<Self> {
        use EstimatorKind::*;
        let e = EstimatorSpec::new;
        let (model, estimators, sizes, reps) = match name {
            "poisson" => (
                ModelSpec::Poisson {
                    theta: ln2(),
                    x_max: 60,
                    aux_max: 30,
                },
                vec![e(SKl), e(SChi), e(SJs), e(NsGamma), e(Mle)],
                vec![1000, 2000],
                100,
            ),
            "poisson-misspecified" => (
                ModelSpec::PoissonMisspecified {
                    x_max: 60,
                    aux_max: 30,
                },
                vec![e(SKl), e(SChi), e(SJs), e(NsGamma), e(Mle)],
                vec![1000, 2000],
                100,
            ),
            "gengamma" => (
                ModelSpec::Gengamma {
                    theta1: 1.3,
                    theta2: 1.3,
                },
                vec![
                    e(SKl),
                    e(NsGamma).gamma_config(GammaConfig::new(-0.01, 0.99, 1.01).expect("valid")),
                    e(Nce),
                ],
                vec![500, 1000, 2000],
                100,
            ),
            "rbm" => (
                ModelSpec::Rbm {
                    d_v: 10,
                    d_h: 2,
                    weight_range: 1.0,
                },
                vec![e(SKl), e(NsGamma), e(Nce).with_kappa(5.0), e(Mle)],
                vec![1000, 2000, 4000],
                20,
            ),
            "flid" => (
                ModelSpec::Flid { v: 8, l: 2 },
                vec![
                    e(SKl),
                    e(NsGamma).gamma_config(GammaConfig::new(-0.01, 0.99, 1.01).expect("valid")),
                    e(Nce),
                ],
                vec![20_000],
                10,
            ),
            _ => return None,
        };
        Some(ExperimentSpec {
            name: name.to_string(),
            model,
            estimators,
            sample_sizes: sizes,
            replications: reps,
            seed: 1,
            metric: None,
            fit: FitConfig::default(),
        })
    }

    pub const PRESETS: [&'static str; 5] =
        ["poisson", "poisson-misspecified", "gengamma", "rbm", "flid"];
}
