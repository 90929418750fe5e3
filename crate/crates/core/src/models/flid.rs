use rand::Rng;

use crate::error::Result;
use crate::model::UnnormalizedModel;

use super::sampling::rng_for;

/// Facility-location diversity model over subsets of `{1..V}`:
/// `log p(S) = Σ_{i∈S} u_i + Σ_d (max_{i∈S} w_{i,d} − Σ_{i∈S} w_{i,d})`,
/// with the max over the empty set taken as 0.
///
/// Points are 0/1 indicator vectors of length `V`; θ is `u` followed by
/// `w` flattened row-major (`V × L`).
#[derive(Debug, Clone)]
pub struct FlidModel {
    pub v: usize,
    pub l: usize,
}

impl FlidModel {
    pub fn new(v: usize, l: usize) -> Self {
        FlidModel { v, l }
    }

    fn w<'t>(&self, theta: &'t [f64]) -> &'t [f64] {
        &theta[self.v..]
    }

    /// Index attaining `max_{i∈S} w_{i,d}`; ties go to the smallest index.
    fn argmax(&self, x: &[f64], w: &[f64], d: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..self.v).filter(|&i| x[i] > 0.5) {
            let val = w[i * self.l + d];
            if best.is_none_or(|(_, b)| val > b) {
                best = Some((i, val));
            }
        }
        best.map(|(i, _)| i)
    }
}

impl UnnormalizedModel for FlidModel {
    fn name(&self) -> &str {
        "flid"
    }
    fn dim_theta(&self) -> usize {
        self.v * (1 + self.l)
    }
    fn dim_x(&self) -> usize {
        self.v
    }
    fn is_discrete(&self) -> bool {
        true
    }
    fn log_p(&self, x: &[f64], theta: &[f64]) -> f64 {
        let w = self.w(theta);
        let mut s: f64 = (0..self.v).filter(|&i| x[i] > 0.5).map(|i| theta[i]).sum();
        for d in 0..self.l {
            if let Some(best) = self.argmax(x, w, d) {
                s += w[best * self.l + d];
                s -= (0..self.v)
                    .filter(|&i| x[i] > 0.5)
                    .map(|i| w[i * self.l + d])
                    .sum::<f64>();
            }
        }
        s
    }
    fn grad_log_p(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let w = self.w(theta);
        for i in 0..self.v {
            let s = if x[i] > 0.5 { 1.0 } else { 0.0 };
            out[i] = s;
            for d in 0..self.l {
                out[self.v + i * self.l + d] = -s;
            }
        }
        for d in 0..self.l {
            if let Some(best) = self.argmax(x, w, d) {
                out[self.v + best * self.l + d] += 1.0;
            }
        }
    }
    fn hess_log_p(&self, _x: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim_theta();
        Some(vec![0.0; d * d])
    }
    /// `u = 0`; `w` drawn from a seeded uniform on `[0, 0.1]` so the max
    /// terms start untied.
    fn initial_theta(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng_for(seed, 0x5eed_0002);
        let mut theta = vec![0.0; self.dim_theta()];
        for t in theta[self.v..].iter_mut() {
            *t = rng.random_range(0.0..0.1);
        }
        theta
    }
    fn enumeration_size(&self) -> Option<u128> {
        1u128.checked_shl(self.v as u32)
    }
    fn for_each_point(&self, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        let mut x = vec![0.0; self.v];
        for code in 0u64..(1u64 << self.v) {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = (code >> i & 1) as f64;
            }
            visit(&x);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluation() {
        let m = FlidModel::new(3, 1);
        // u = (0.5, -0.2, 0.1), w = (0.3, 0.9, 0.4)
        let theta = [0.5, -0.2, 0.1, 0.3, 0.9, 0.4];
        // S = {0, 1}: u0 + u1 + max(0.3, 0.9) - (0.3 + 0.9)
        let lp = m.log_p(&[1.0, 1.0, 0.0], &theta);
        assert!((lp - (0.3 + 0.9 - 1.2)).abs() < 1e-15);
        assert_eq!(m.log_p(&[0.0, 0.0, 0.0], &theta), 0.0);
        // Singletons: max and sum cancel.
        assert!((m.log_p(&[0.0, 0.0, 1.0], &theta) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ties_resolve_to_smallest_index() {
        let m = FlidModel::new(3, 1);
        let theta = [0.0, 0.0, 0.0, 0.7, 0.7, 0.1];
        let mut g = vec![0.0; 6];
        m.grad_log_p(&[1.0, 1.0, 1.0], &theta, &mut g);
        assert_eq!(&g[3..], &[0.0, -1.0, -1.0]);
    }

    #[test]
    fn all_subsets_enumerated() {
        let m = FlidModel::new(12, 2);
        let mut count = 0;
        m.for_each_point(&mut |_| count += 1).unwrap();
        assert_eq!(count, 4096);
    }
}
