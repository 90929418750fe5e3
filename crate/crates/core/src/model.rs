//! Unnormalized models `p(x; θ)` and the one-parameter extension
//! `q(x; τ) = e^{-c} p(x; θ)` with `τ = (c, θ)`.

use std::sync::Arc;

use crate::density::DensityEstimate;
use crate::error::{Error, Result};
use crate::space::SampleSpace;

/// Largest sample space that is summed over explicitly.
pub const ENUMERATION_BOUND: u128 = 1 << 22;

/// Extended parameter `(c, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau {
    pub c: f64,
    pub theta: Vec<f64>,
}

impl Tau {
    pub fn new(c: f64, theta: Vec<f64>) -> Result<Self> {
        if !c.is_finite() || theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("τ entries must be finite".into()));
        }
        Ok(Tau { c, theta })
    }

    /// Packs `(c, θ)` into one vector with `c` first.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.theta.len() + 1);
        v.push(self.c);
        v.extend_from_slice(&self.theta);
        v
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Tau {
            c: v[0],
            theta: v[1..].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len() + 1
    }
}

/// A parametric nonnegative function `p(x; θ)` with unknown normalizer.
pub trait UnnormalizedModel: Send + Sync {
    /// Short identifier used in reports.
    fn name(&self) -> &str;

    fn dim_theta(&self) -> usize;

    fn dim_x(&self) -> usize;

    /// Whether the baseline measure is counting measure.
    fn is_discrete(&self) -> bool;

    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64;

    /// `∇_θ log p(x; θ)` written into `out` (length `dim_theta`).
    fn grad_log_p(&self, x: &[f64], theta: &[f64], out: &mut [f64]);

    /// Row-major `∇²_θ log p`, when available in closed form.
    fn hess_log_p(&self, _x: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `log p` split into a point-dependent head and a constant offset whose
    /// exact sum is `log p`. Only scale wrappers return a nonzero offset.
    fn log_p_parts(&self, x: &[f64], theta: &[f64]) -> (f64, f64) {
        (self.log_p(x, theta), 0.0)
    }

    /// Starting θ for the fitters; models whose loss surfaces are
    /// symmetric about the origin perturb it with `seed`.
    fn initial_theta(&self, _seed: u64) -> Vec<f64> {
        vec![0.0; self.dim_theta()]
    }

    /// Number of points visited by [`Self::for_each_point`], if the model can
    /// enumerate its space.
    fn enumeration_size(&self) -> Option<u128> {
        None
    }

    /// Visits every point of the (possibly truncated) discrete space.
    fn for_each_point(&self, _visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        Err(Error::NormalizerUnavailable)
    }

    /// `log Σ_x p(x; θ)` (or the integral), by enumeration unless overridden.
    fn exact_log_normalizer(&self, theta: &[f64]) -> Result<f64> {
        enumerated_log_normalizer(self, theta, None)
    }

    /// `∇_θ` of [`Self::exact_log_normalizer`].
    fn grad_exact_log_normalizer(&self, theta: &[f64], out: &mut [f64]) -> Result<()> {
        enumerated_log_normalizer(self, theta, Some(out)).map(|_| ())
    }
}

fn check_enumeration<M: UnnormalizedModel + ?Sized>(model: &M) -> Result<()> {
    match model.enumeration_size() {
        None => Err(Error::NormalizerUnavailable),
        Some(size) if size > ENUMERATION_BOUND => Err(Error::SpaceTooLarge {
            size,
            bound: ENUMERATION_BOUND,
        }),
        Some(_) => Ok(()),
    }
}

/// Streaming log-sum-exp over the enumerated space, optionally accumulating
/// the model expectation of `∇_θ log p`.
fn enumerated_log_normalizer<M: UnnormalizedModel + ?Sized>(
    model: &M,
    theta: &[f64],
    grad: Option<&mut [f64]>,
) -> Result<f64> {
    check_enumeration(model)?;
    let d = model.dim_theta();
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut acc = vec![0.0; if grad.is_some() { d } else { 0 }];
    let mut g = vec![0.0; d];
    let want_grad = grad.is_some();
    model.for_each_point(&mut |x| {
        let lp = model.log_p(x, theta);
        if lp == f64::NEG_INFINITY {
            return;
        }
        if lp > max {
            let scale = (max - lp).exp();
            sum *= scale;
            for a in acc.iter_mut() {
                *a *= scale;
            }
            max = lp;
        }
        let e = (lp - max).exp();
        sum += e;
        if want_grad {
            model.grad_log_p(x, theta, &mut g);
            for (a, gj) in acc.iter_mut().zip(&g) {
                *a += e * gj;
            }
        }
    })?;
    if let Some(out) = grad {
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = a / sum;
        }
    }
    Ok(max + sum.ln())
}

/// Normalized log-probabilities `log p(x; θ) - log Z(θ)` over the
/// enumerated space, in visiting order, together with the points.
pub fn enumerate_log_pmf<M: UnnormalizedModel + ?Sized>(
    model: &M,
    theta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_enumeration(model)?;
    let log_z = model.exact_log_normalizer(theta)?;
    let mut points = Vec::new();
    let mut logp = Vec::new();
    model.for_each_point(&mut |x| {
        points.extend_from_slice(x);
        logp.push(model.log_p(x, theta) - log_z);
    })?;
    Ok((points, logp))
}

/// Materializes the enumerable space of a model.
pub fn model_space<M: UnnormalizedModel + ?Sized>(model: &M) -> Result<SampleSpace> {
    check_enumeration(model)?;
    let mut points = Vec::new();
    model.for_each_point(&mut |x| points.extend_from_slice(x))?;
    SampleSpace::enumerable(model.dim_x(), points)
}

/// `p(x; θ)` multiplied by a positive constant `λ`.
#[derive(Clone)]
pub struct ScaledModel {
    inner: Arc<dyn UnnormalizedModel>,
    log_lambda: f64,
}

impl ScaledModel {
    pub fn new(inner: Arc<dyn UnnormalizedModel>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain("scale factor must be positive".into()));
        }
        Ok(ScaledModel {
            inner,
            log_lambda: lambda.ln(),
        })
    }
}

impl UnnormalizedModel for ScaledModel {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim_theta(&self) -> usize {
        self.inner.dim_theta()
    }
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn is_discrete(&self) -> bool {
        self.inner.is_discrete()
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.inner.log_p(x, theta) + self.log_lambda
    }
    fn grad_log_p(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        self.inner.grad_log_p(x, theta, out)
    }
    fn hess_log_p(&self, x: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
        self.inner.hess_log_p(x, theta)
    }
    fn log_p_parts(&self, x: &[f64], theta: &[f64]) -> (f64, f64) {
        let (head, offset) = self.inner.log_p_parts(x, theta);
        (head, offset + self.log_lambda)
    }
    fn initial_theta(&self, seed: u64) -> Vec<f64> {
        self.inner.initial_theta(seed)
    }
    fn enumeration_size(&self) -> Option<u128> {
        self.inner.enumeration_size()
    }
    fn for_each_point(&self, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        self.inner.for_each_point(visit)
    }
    fn exact_log_normalizer(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.inner.exact_log_normalizer(theta)? + self.log_lambda)
    }
    fn grad_exact_log_normalizer(&self, theta: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.grad_exact_log_normalizer(theta, out)
    }
}

/// `q(x; τ) = e^{-c} p(x; θ)`; τ is passed packed as `[c, θ...]`.
#[derive(Clone, Copy)]
pub struct ExtendedModel<'a> {
    pub base: &'a dyn UnnormalizedModel,
}

impl<'a> ExtendedModel<'a> {
    pub fn new(base: &'a dyn UnnormalizedModel) -> Self {
        ExtendedModel { base }
    }

    pub fn dim_tau(&self) -> usize {
        self.base.dim_theta() + 1
    }

    pub fn log_q(&self, x: &[f64], tau: &[f64]) -> f64 {
        -tau[0] + self.base.log_p(x, &tau[1..])
    }

    /// `∇_τ log q = (-1, ∇_θ log p)`.
    pub fn grad_tau_log_q(&self, x: &[f64], tau: &[f64], out: &mut [f64]) {
        out[0] = -1.0;
        self.base.grad_log_p(x, &tau[1..], &mut out[1..]);
    }

    /// Row-major `∇²_τ log q`; the `c` row and column are zero.
    pub fn hess_tau_log_q(&self, x: &[f64], tau: &[f64]) -> Vec<f64> {
        let d = self.base.dim_theta();
        let m = d + 1;
        let theta = &tau[1..];
        let h = self
            .base
            .hess_log_p(x, theta)
            .unwrap_or_else(|| finite_difference_hessian(self.base, x, theta));
        let mut out = vec![0.0; m * m];
        for i in 0..d {
            for j in 0..d {
                out[(i + 1) * m + j + 1] = h[i * d + j];
            }
        }
        out
    }
}

/// Hessian of `log p` by central differences of the analytic gradient, step
/// `1e-5 (1 + |θ_j|)`, symmetrized.
pub fn finite_difference_hessian(
    model: &dyn UnnormalizedModel,
    x: &[f64],
    theta: &[f64],
) -> Vec<f64> {
    let d = theta.len();
    let mut h = vec![0.0; d * d];
    let mut probe = theta.to_vec();
    let mut up = vec![0.0; d];
    let mut down = vec![0.0; d];
    for j in 0..d {
        let step = 1e-5 * (1.0 + theta[j].abs());
        probe[j] = theta[j] + step;
        model.grad_log_p(x, &probe, &mut up);
        probe[j] = theta[j] - step;
        model.grad_log_p(x, &probe, &mut down);
        probe[j] = theta[j];
        for i in 0..d {
            h[i * d + j] = (up[i] - down[i]) / (2.0 * step);
        }
    }
    for i in 0..d {
        for j in 0..i {
            let s = 0.5 * (h[i * d + j] + h[j * d + i]);
            h[i * d + j] = s;
            h[j * d + i] = s;
        }
    }
    h
}

/// `w(x) = q(x; τ) / η̂(x)`.
pub fn density_ratio(
    model: &ExtendedModel<'_>,
    tau: &Tau,
    eta: &dyn DensityEstimate,
    x: &[f64],
) -> Result<f64> {
    let e = eta.eval(x);
    if e <= 0.0 || e.is_nan() {
        return Err(Error::NonpositiveDensity { value: e });
    }
    Ok((model.log_q(x, &tau.to_vec()) - e.ln()).exp())
}
