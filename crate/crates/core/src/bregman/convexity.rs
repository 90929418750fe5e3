use std::fmt;

use super::generator::Generator;

/// Outcome of the grid convexity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certificate {
    Convex,
    /// The condition fails at `witness`, where it evaluates to `value`.
    NotCertified {
        witness: f64,
        value: f64,
    },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Convex => write!(f, "Convex"),
            Certificate::NotCertified { witness, value } => {
                write!(
                    f,
                    "NotCertified (witness z = {witness:.6e}, condition = {value:.6e})"
                )
            }
        }
    }
}

/// `(2z - 1) f''(z) + z(z - 1) f'''(z)`.
pub fn convexity_expression(f: &Generator, z: f64) -> f64 {
    (2.0 * z - 1.0) * f.d2(z) + z * (z - 1.0) * f.d3(z)
}

/// 1001 log-spaced points over `[1e-3, 1e3]`.
pub fn default_certification_grid() -> Vec<f64> {
    (0..=1000)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 1000.0))
        .collect()
}

/// Checks the sufficient condition for the `(One, Identity)` loss of an
/// exponential-family model to be convex in τ; reports the smallest grid
/// point where it fails.
pub fn certify_convexity(f: &Generator, grid: &[f64]) -> Certificate {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    for z in sorted {
        let value = convexity_expression(f, z);
        if !(value >= -1e-12) {
            return Certificate::NotCertified { witness: z, value };
        }
    }
    Certificate::Convex
}
