use std::fmt;

use crate::error::{Error, Result};

/// User-supplied convex generator: `f` and its first three derivatives.
#[derive(Clone, Copy)]
pub struct CustomGenerator {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub d1: fn(f64) -> f64,
    pub d2: fn(f64) -> f64,
    pub d3: fn(f64) -> f64,
}

impl fmt::Debug for CustomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGenerator")
            .field("name", &self.name)
            .finish()
    }
}

/// Strictly convex generator `f` with `f''(1) = 1`.
#[derive(Debug, Clone, Copy)]
pub enum Generator {
    /// `x log x`
    Kl,
    /// `x² / 2`
    Chi,
    /// `2x log x - 2(1+x) log(1+x)`
    Js,
    Custom(CustomGenerator),
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

impl Generator {
    /// Builds a custom generator after checking convexity, the `f''(1) = 1`
    /// normalization and the derivatives against finite differences.
    pub fn custom(g: CustomGenerator) -> Result<Self> {
        let gen = Generator::Custom(g);
        gen.validate()?;
        Ok(gen)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "kl" => Some(Generator::Kl),
            "chi" => Some(Generator::Chi),
            "js" => Some(Generator::Js),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Kl => "kl",
            Generator::Chi => "chi",
            Generator::Js => "js",
            Generator::Custom(g) => g.name,
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self {
            Generator::Kl => xlogx(x),
            Generator::Chi => 0.5 * x * x,
            Generator::Js => 2.0 * xlogx(x) - 2.0 * (1.0 + x) * x.ln_1p(),
            Generator::Custom(g) => (g.f)(x),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            Generator::Kl => x.ln() + 1.0,
            Generator::Chi => x,
            Generator::Js => 2.0 * (x.ln() - x.ln_1p()),
            Generator::Custom(g) => (g.d1)(x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            Generator::Kl => 1.0 / x,
            Generator::Chi => 1.0,
            Generator::Js => 2.0 / (x * (1.0 + x)),
            Generator::Custom(g) => (g.d2)(x),
        }
    }

    pub fn d3(&self, x: f64) -> f64 {
        match self {
            Generator::Kl => -1.0 / (x * x),
            Generator::Chi => 0.0,
            Generator::Js => -2.0 / (x * x) + 2.0 / ((1.0 + x) * (1.0 + x)),
            Generator::Custom(g) => (g.d3)(x),
        }
    }

    /// Whether `f` extends continuously to `x = 0`.
    pub fn defined_at_zero(&self) -> bool {
        !matches!(self, Generator::Custom(_))
    }

    fn validate(&self) -> Result<()> {
        let d2_one = self.d2(1.0);
        if (d2_one - 1.0).abs() > 1e-10 {
            return Err(Error::config(
                "generator",
                format!("f''(1) = {d2_one}, expected 1"),
            ));
        }
        for x in validation_grid() {
            if !(self.d2(x) > 0.0) {
                return Err(Error::config(
                    "generator",
                    format!("f'' is not positive at {x}"),
                ));
            }
            for (order, exact) in [(1, self.d1(x)), (2, self.d2(x)), (3, self.d3(x))] {
                let h = 1e-5 * x.max(1e-2);
                let fd = match order {
                    1 => (self.f(x + h) - self.f(x - h)) / (2.0 * h),
                    2 => (self.d1(x + h) - self.d1(x - h)) / (2.0 * h),
                    _ => (self.d2(x + h) - self.d2(x - h)) / (2.0 * h),
                };
                if (fd - exact).abs() > 1e-5 * exact.abs().max(1.0) {
                    return Err(Error::config(
                        "generator",
                        format!(
                            "derivative of order {order} disagrees with finite differences at {x}"
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// 41 log-spaced points over `[0.01, 100]`.
pub(crate) fn validation_grid() -> impl Iterator<Item = f64> {
    (0..=40).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64))
}

/// `f`, `f'`, `f''` or `f'''` at `x > 0`.
pub fn generator_value(f: &Generator, x: f64, order: u8) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("generator evaluated at {x}")));
    }
    match order {
        0 => Ok(f.f(x)),
        1 => Ok(f.d1(x)),
        2 => Ok(f.d2(x)),
        3 => Ok(f.d3(x)),
        _ => Err(Error::Domain(format!(
            "derivative order {order} not available"
        ))),
    }
}

/// `f(u) - f(v) - f'(v)(u - v)`.
pub fn separable_bregman_pointwise(f: &Generator, u: f64, v: f64) -> Result<f64> {
    let u_ok = u > 0.0 || (u == 0.0 && f.defined_at_zero());
    if !u_ok || !u.is_finite() || !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!(
            "Bregman divergence at u = {u}, v = {v}"
        )));
    }
    Ok(bregman_unchecked(f, u, v))
}

pub(crate) fn bregman_unchecked(f: &Generator, u: f64, v: f64) -> f64 {
    f.f(u) - f.f(v) - f.d1(v) * (u - v)
}
