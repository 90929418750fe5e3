use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone transform applied to the density ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Identity,
    /// Constant 1.
    One,
    /// `w^a`
    Power(f64),
}

impl Link {
    pub fn eval(&self, w: f64) -> f64 {
        match *self {
            Link::Identity => w,
            Link::One => 1.0,
            Link::Power(a) => w.powf(a),
        }
    }

    pub fn deriv(&self, w: f64) -> f64 {
        match *self {
            Link::Identity => 1.0,
            Link::One => 0.0,
            Link::Power(a) => a * w.powf(a - 1.0),
        }
    }
}

/// `(h₁, h₂)`; the default `(One, Identity)` gives `B_f(1, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkPair {
    pub h1: Link,
    pub h2: Link,
}

impl Default for LinkPair {
    fn default() -> Self {
        LinkPair {
            h1: Link::One,
            h2: Link::Identity,
        }
    }
}

impl LinkPair {
    /// Checks that the links agree only at `w = 1` and have different slopes
    /// there.
    pub fn new(h1: Link, h2: Link) -> Result<Self> {
        let pair = LinkPair { h1, h2 };
        if (h1.deriv(1.0) - h2.deriv(1.0)).abs() < 1e-12 {
            return Err(Error::config("links", "h1'(1) must differ from h2'(1)"));
        }
        for i in 0..=40 {
            let w = 10f64.powf(-2.0 + 0.1 * i as f64);
            let same = (h1.eval(w) - h2.eval(w)).abs() <= 1e-12 * h1.eval(w).abs().max(1.0);
            if same != (i == 20) {
                return Err(Error::config(
                    "links",
                    format!("h1 and h2 must agree only at w = 1 (w = {w})"),
                ));
            }
        }
        Ok(pair)
    }

    /// The reversed ordering `h₁(w) = w, h₂(w) = 1`.
    pub fn reversed() -> Self {
        LinkPair {
            h1: Link::Identity,
            h2: Link::One,
        }
    }
}
