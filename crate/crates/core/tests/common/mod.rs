//! Shared helpers for the integration suites.

use std::sync::Arc;

use ultrasphere_core::measure::{Dim, NodalFn, QuadratureRule};
use ultrasphere_core::rng::SplitMix64;
use ultrasphere_core::spectral::Basis;

pub fn rule(d: f64, n: usize) -> Arc<QuadratureRule> {
    QuadratureRule::new(Dim::new(d).unwrap(), n).unwrap()
}

pub fn basis(d: f64, n: usize, kmax: usize) -> (Arc<QuadratureRule>, Basis) {
    let r = rule(d, n);
    let b = Basis::new(&r, kmax).unwrap();
    (r, b)
}

/// Closed-form even moment of the measure:
/// `int x^(2j) dnu_d = prod_{i<=j} (2i-1)/(d+2i-1)`.
#[allow(dead_code)]
pub fn even_moment(d: f64, j: usize) -> f64 {
    (1..=j)
        .map(|i| (2 * i - 1) as f64 / (d + (2 * i - 1) as f64))
        .product()
}

/// Random polynomial `1 + amp * w` with `w` a normalized Gaussian
/// combination of the first six eigenmodes, rescaled until the minimum
/// stays above `floor`.
#[allow(dead_code)]
pub fn random_positive_poly(b: &Basis, rng: &mut SplitMix64, amp: f64, floor: f64) -> NodalFn {
    let r = b.rule();
    let n = r.len();
    let mut w = vec![0.0; n];
    for k in 1..=6 {
        let gamma = rng.next_normal();
        for (acc, &v) in w.iter_mut().zip(b.mode(k).unwrap().values()) {
            *acc += gamma * v;
        }
    }
    let norm = (w
        .iter()
        .zip(r.weights())
        .map(|(&v, &wt)| wt * v * v)
        .sum::<f64>())
    .sqrt();
    let mut a = amp;
    loop {
        let values: Vec<f64> = w.iter().map(|&v| 1.0 + a * v / norm).collect();
        if values.iter().cloned().fold(f64::INFINITY, f64::min) >= floor {
            return NodalFn::new(r, values).unwrap();
        }
        a *= 0.5;
    }
}

/// Weighted inner product against the rule.
#[allow(dead_code)]
pub fn dot(r: &QuadratureRule, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(r.weights())
        .map(|((&x, &y), &w)| w * x * y)
        .sum()
}
