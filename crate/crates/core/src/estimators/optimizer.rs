use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Tau;
use crate::numerics::{dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// BFGS with a backtracking (sufficient-decrease) line search.
    #[default]
    QuasiNewton,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Starting θ (or full τ for fitters with a `c` parameter); the model's
    /// own initialization when absent.
    pub initial: Option<Vec<f64>>,
    pub tolerance: f64,
    pub max_iter: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            initial: None,
            tolerance: 1e-8,
            max_iter: 500,
            optimizer: Optimizer::QuasiNewton,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Self {
        self.initial = Some(initial);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `[c, θ...]` when `has_c`, otherwise `θ`.
    pub params: Vec<f64>,
    pub has_c: bool,
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Loss at every accepted iterate, starting with the initial point.
    pub trace: Vec<f64>,
}

impl FitResult {
    pub fn theta(&self) -> &[f64] {
        if self.has_c {
            &self.params[1..]
        } else {
            &self.params
        }
    }

    pub fn c(&self) -> Option<f64> {
        self.has_c.then(|| self.params[0])
    }

    pub fn tau(&self) -> Option<Tau> {
        self.has_c.then(|| Tau::from_slice(&self.params))
    }
}

/// Objective returning the loss and writing its gradient.
pub type Objective<'a> = dyn FnMut(&[f64], &mut [f64]) -> Result<f64> + 'a;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MAX_STALLED: usize = 10;

/// Minimizes `objective` from `x0`. Trial points whose loss is an error or
/// non-finite are treated as infinitely bad and the step is halved.
pub fn minimize(
    objective: &mut Objective<'_>,
    x0: &[f64],
    cfg: &FitConfig,
    has_c: bool,
) -> Result<FitResult> {
    cfg.validate()?;
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut fx = objective(&x, &mut g)?;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "loss is not finite at the initial point".into(),
        ));
    }
    let mut h = identity(d);
    let mut h_is_identity = true;
    let mut trace = vec![fx];
    let mut iterations = 0;
    let mut x_new = vec![0.0; d];
    let mut g_new = vec![0.0; d];
    let mut p = vec![0.0; d];

    let mut stalled = 0;
    while norm2(&g) > cfg.tolerance && iterations < cfg.max_iter && stalled < MAX_STALLED {
        match cfg.optimizer {
            Optimizer::QuasiNewton => mat_vec_neg(&h, &g, &mut p),
            Optimizer::GradientDescent => p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi = -gi),
        }
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            h = identity(d);
            h_is_identity = true;
            p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi = -gi);
            slope = dot(&g, &p);
        }
        // Unit BFGS steps can be huge before the curvature is learned.
        let mut t = if h_is_identity {
            1f64.min(1.0 / norm2(&p).max(1e-300)).max(1e-8)
        } else {
            1.0
        };
        let mut accepted = None;
        let g_norm = norm2(&g);
        for _ in 0..MAX_HALVINGS {
            for i in 0..d {
                x_new[i] = x[i] + t * p[i];
            }
            if let Ok(f_new) = objective(&x_new, &mut g_new) {
                if f_new.is_finite() && g_new.iter().all(|v| v.is_finite()) {
                    if f_new <= fx + ARMIJO * t * slope {
                        accepted = Some(f_new);
                        break;
                    }
                    // Near the optimum rounding defeats the Armijo test;
                    // a step that does not increase the loss but shrinks
                    // the gradient is still progress.
                    if f_new <= fx && norm2(&g_new) < g_norm {
                        accepted = Some(f_new);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let f_new = match accepted {
            Some(f) => f,
            None if !h_is_identity => {
                h = identity(d);
                h_is_identity = true;
                continue;
            }
            None => break,
        };
        iterations += 1;
        // The loss is at its rounding floor when steps stop changing it.
        stalled = if f_new < fx { 0 } else { stalled + 1 };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if cfg.optimizer == Optimizer::QuasiNewton && sy > 1e-12 * norm2(&s) * norm2(&y) {
            if h_is_identity {
                let scale = sy / dot(&y, &y);
                h.iter_mut().flatten().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
            h_is_identity = false;
        }
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;
        trace.push(fx);
    }
    let grad_norm = norm2(&g);
    Ok(FitResult {
        params: x,
        has_c,
        loss: fx,
        grad_norm,
        iterations,
        converged: grad_norm <= cfg.tolerance,
        trace,
    })
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn mat_vec_neg(h: &[Vec<f64>], g: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(h) {
        *o = -dot(row, g);
    }
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let d = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = h.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..d {
        for j in 0..d {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
