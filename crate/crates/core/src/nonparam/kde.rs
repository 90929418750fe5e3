use rayon::prelude::*;

use crate::density::{DensityEstimate, ETA_FLOOR};
use crate::error::{Error, Result};
use crate::space::Dataset;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Kernel terms beyond this many bandwidths are dropped; the order-6
/// kernel is below 1e-19 there.
const CUTOFF: f64 = 10.0;

/// Gaussian-based polynomial kernel of order 2, 4 or 6.
pub fn kernel(order: u8, u: f64) -> f64 {
    let u2 = u * u;
    let phi = INV_SQRT_2PI * (-0.5 * u2).exp();
    match order {
        2 => phi,
        4 => 0.5 * (3.0 - u2) * phi,
        _ => 0.125 * (15.0 - 10.0 * u2 + u2 * u2) * phi,
    }
}

fn check_order(order: u8) -> Result<()> {
    if matches!(order, 2 | 4 | 6) {
        Ok(())
    } else {
        Err(Error::config("kernel_order", "must be 2, 4 or 6"))
    }
}

/// Product-kernel density estimate `1/(n ι^d) Σ_i Π_j K((x_ij - x_j)/ι)`.
#[derive(Debug, Clone)]
pub struct KdeEstimate {
    data: Dataset,
    /// One-dimensional data in ascending order, for windowed sums.
    sorted: Option<Vec<f64>>,
    bandwidth: f64,
    order: u8,
}

impl KdeEstimate {
    pub fn new(data: &Dataset, bandwidth: f64, order: u8) -> Result<Self> {
        check_order(order)?;
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::config("bandwidth", "must be positive"));
        }
        let sorted = (data.dim() == 1).then(|| {
            let mut v = data.values().to_vec();
            v.sort_by(f64::total_cmp);
            v
        });
        Ok(KdeEstimate {
            data: data.clone(),
            sorted,
            bandwidth,
            order,
        })
    }

    /// Bandwidth chosen by leave-one-out likelihood over the default grid.
    pub fn fit(data: &Dataset, order: u8) -> Result<Self> {
        let h = select_bandwidth_cv(data, order, None)?;
        KdeEstimate::new(data, h, order)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Unnormalized kernel sum `Σ_i Π_j K((x_ij - x_j)/ι)`.
    fn kernel_sum(&self, x: &[f64]) -> f64 {
        kernel_sum(
            &self.data,
            self.sorted.as_deref(),
            self.bandwidth,
            self.order,
            x,
        )
    }

    /// Estimate before flooring; may be negative for orders above 2.
    pub fn raw_eval(&self, x: &[f64]) -> f64 {
        let n = self.data.n() as f64;
        self.kernel_sum(x) / (n * self.bandwidth.powi(self.data.dim() as i32))
    }
}

fn kernel_sum(data: &Dataset, sorted: Option<&[f64]>, h: f64, order: u8, x: &[f64]) -> f64 {
    match sorted {
        Some(v) => {
            let lo = v.partition_point(|&y| y < x[0] - CUTOFF * h);
            let hi = v.partition_point(|&y| y <= x[0] + CUTOFF * h);
            v[lo..hi]
                .iter()
                .map(|&y| kernel(order, (y - x[0]) / h))
                .sum()
        }
        None => data
            .points()
            .map(|p| {
                p.iter()
                    .zip(x)
                    .map(|(a, b)| kernel(order, (a - b) / h))
                    .product::<f64>()
            })
            .sum(),
    }
}

impl DensityEstimate for KdeEstimate {
    fn eval(&self, x: &[f64]) -> f64 {
        kde_eval(self, x)
    }
}

/// KDE value at `x`, floored at [`ETA_FLOOR`].
pub fn kde_eval(kde: &KdeEstimate, x: &[f64]) -> f64 {
    let v = kde.raw_eval(x);
    if v > ETA_FLOOR {
        v
    } else {
        ETA_FLOOR
    }
}

/// 30 log-spaced bandwidths over `[0.05 σ̂ n^{-1/5}, 5 σ̂]`, with σ̂ the
/// largest per-coordinate sample standard deviation.
pub fn default_bandwidth_grid(data: &Dataset) -> Result<Vec<f64>> {
    let sd = sample_sd(data);
    if !(sd > 0.0) {
        return Err(Error::DegenerateData("all points are identical".into()));
    }
    let n = data.n() as f64;
    let lo = (0.05 * sd * n.powf(-0.2)).ln();
    let hi = (5.0 * sd).ln();
    Ok((0..30)
        .map(|i| (lo + (hi - lo) * i as f64 / 29.0).exp())
        .collect())
}

fn sample_sd(data: &Dataset) -> f64 {
    let n = data.n() as f64;
    (0..data.dim())
        .map(|j| {
            let mean = data.points().map(|p| p[j]).sum::<f64>() / n;
            let ss = data.points().map(|p| (p[j] - mean).powi(2)).sum::<f64>();
            (ss / (n - 1.0).max(1.0)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `Σ_i log η̂_{-i}(x_i)`, each leave-one-out value floored.
pub fn loo_log_likelihood(data: &Dataset, order: u8, bandwidth: f64) -> f64 {
    let kde = KdeEstimate::new(data, bandwidth, order).expect("validated bandwidth");
    let n = data.n() as f64;
    let k0 = kernel(order, 0.0).powi(data.dim() as i32);
    let norm = (n - 1.0) * bandwidth.powi(data.dim() as i32);
    data.points()
        .map(|x| {
            let v = (kde.kernel_sum(x) - k0) / norm;
            if v > ETA_FLOOR {
                v.ln()
            } else {
                ETA_FLOOR.ln()
            }
        })
        .sum()
}

/// Leave-one-out likelihood bandwidth; ties go to the larger candidate.
/// `grid` defaults to [`default_bandwidth_grid`].
pub fn select_bandwidth_cv(data: &Dataset, order: u8, grid: Option<&[f64]>) -> Result<f64> {
    check_order(order)?;
    if data.n() < 2 {
        return Err(Error::DegenerateData(
            "bandwidth selection needs n >= 2".into(),
        ));
    }
    let first = data.point(0);
    if data.points().all(|p| p == first) {
        return Err(Error::DegenerateData("all points are identical".into()));
    }
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = default_bandwidth_grid(data)?;
            &owned
        }
    };
    if grid.is_empty() || grid.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::config("bandwidth_grid", "needs positive candidates"));
    }
    let mut scored: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&h| (h, loo_log_likelihood(data, order, h)))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0];
    for &(h, ll) in &scored[1..] {
        if ll >= best.1 {
            best = (h, ll);
        }
    }
    Ok(best.0)
}
