//! The invariant probability measure of the ultraspherical operator and
//! Gauss quadrature against it.
//!
//! For a real dimension parameter `d >= 1` the measure on (-1, 1) is
//!
//! ```text
//! dnu_d(x) = (1 - x^2)^(d/2 - 1) dx / Z_d,
//! Z_d = sqrt(pi) Gamma(d/2) / Gamma((d+1)/2),
//! ```
//!
//! the weight for which the Gegenbauer polynomials are orthogonal. Integer
//! `d` corresponds to averaging zonal functions over the d-sphere, but the
//! whole construction only needs the weight exponent to exceed -1/2, so any
//! real `d >= 1` is admitted.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dimension parameter of the measure and operator. Any real `d >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dim(f64);

impl Dim {
    pub fn new(d: f64) -> Result<Self> {
        if d.is_finite() && d >= 1.0 {
            Ok(Self(d))
        } else {
            Err(Error::Domain("dimension must satisfy d >= 1"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl core::fmt::Display for Dim {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Normalization constant `Z_d = sqrt(pi) Gamma(d/2) / Gamma((d+1)/2)`,
/// i.e. `int_{-1}^{1} (1-x^2)^(d/2-1) dx`.
pub fn normalization_zd(d: Dim) -> f64 {
    let d = d.get();
    libm::sqrt(core::f64::consts::PI)
        * libm::exp(libm::lgamma(d / 2.0) - libm::lgamma((d + 1.0) / 2.0))
}

/// Off-diagonal entry `b_k` of the Jacobi matrix of `nu_d` in the
/// orthonormal basis: `x p_{k-1} = b_k p_k + b_{k-1} p_{k-2}`.
///
/// `b_k^2 = k (k + d - 2) / ((2k + d - 3)(2k + d - 1))`; the `k = 1` entry
/// is taken in the cancelled form `1 / (d + 1)` which stays finite at
/// `d = 1` where numerator and denominator both vanish.
pub(crate) fn jacobi_offdiag(d: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        return libm::sqrt(1.0 / (d + 1.0));
    }
    let k = k as f64;
    libm::sqrt(k * (k + d - 2.0) / ((2.0 * k + d - 3.0) * (2.0 * k + d - 1.0)))
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL
/// iteration with Wilkinson shifts.
///
/// `diag` holds the diagonal and `off[0..n-1]` the off-diagonal
/// (`off[n-1]` is scratch). On return `diag` holds the (unsorted)
/// eigenvalues.
fn tridiag_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    debug_assert_eq!(off.len(), n);
    off[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = libm::fabs(diag[m]) + libm::fabs(diag[m + 1]);
                if libm::fabs(off[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenFailure);
            }

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = libm::hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + libm::copysign(r, g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;

            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = libm::hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    // a rotation annihilated the subdiagonal early
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Orthonormal-polynomial recurrence at a point: returns
/// `(p_n(x), p_n'(x), sum_{k<n} p_k(x)^2)`. The inverse of the last sum is
/// the Gauss weight at a node (Christoffel function).
fn ortho_eval(x: f64, n: usize, offdiag: &[f64]) -> (f64, f64, f64) {
    debug_assert!(n >= 2 && offdiag.len() > n);
    let mut p_prev = 1.0;
    let mut d_prev = 0.0;
    let mut p = x / offdiag[1];
    let mut d = 1.0 / offdiag[1];
    let mut christoffel = 1.0 + p * p;
    for k in 1..n {
        let p_next = (x * p - offdiag[k] * p_prev) / offdiag[k + 1];
        let d_next = (p + x * d - offdiag[k] * d_prev) / offdiag[k + 1];
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
        if k + 1 < n {
            christoffel += p * p;
        }
    }
    (p, d, christoffel)
}

/// Gauss rule for the probability measure `nu_d`: `n` nodes in (-1, 1) and
/// positive weights summing to one, exact on polynomials of degree
/// `<= 2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    d: Dim,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Golub-Welsch construction: the nodes start as the eigenvalues of the
    /// Jacobi matrix of `nu_d`, are polished by a few Newton steps on the
    /// degree-`n` orthonormal polynomial, and the weights come from the
    /// Christoffel function, `w_i = 1 / sum_{k<n} p_k(x_i)^2`. The rule is
    /// then symmetrized exactly and the weights renormalized to unit mass.
    pub fn new(d: Dim, n: usize) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::Domain("quadrature needs at least 2 nodes"));
        }
        let df = d.get();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        for (k, o) in off.iter_mut().enumerate().take(n - 1) {
            *o = jacobi_offdiag(df, k + 1);
        }
        tridiag_eigenvalues(&mut diag, &mut off)?;
        diag.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));

        let offdiag: Vec<f64> = core::iter::once(0.0)
            .chain((1..=n).map(|k| jacobi_offdiag(df, k)))
            .collect();
        let mut nodes = diag;
        let mut weights = vec![0.0; n];
        for (x, w) in nodes.iter_mut().zip(&mut weights) {
            for _ in 0..3 {
                let (pn, dpn, _) = ortho_eval(*x, n, &offdiag);
                let step = pn / dpn;
                if step.is_finite() {
                    *x -= step;
                }
            }
            *w = 1.0 / ortho_eval(*x, n, &offdiag).2;
        }

        // The measure is even, so the rule is symmetrized exactly.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }

        Ok(Arc::new(Self { d, nodes, weights }))
    }

    #[inline]
    pub fn d(&self) -> Dim {
        self.d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature of a function given by a closure.
    pub fn integrate_fn(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub(crate) fn same_discretization(&self, other: &Self) -> bool {
        self.d == other.d && self.len() == other.len()
    }
}

/// A function known by its values at the nodes of a quadrature rule.
#[derive(Debug, Clone)]
pub struct NodalFn {
    rule: Arc<QuadratureRule>,
    values: Vec<f64>,
}

impl NodalFn {
    pub fn new(rule: &Arc<QuadratureRule>, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::Mismatch("value count differs from node count"));
        }
        Ok(Self {
            rule: Arc::clone(rule),
            values,
        })
    }

    pub fn from_fn(rule: &Arc<QuadratureRule>, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = rule.nodes().iter().map(|&x| f(x)).collect();
        Self {
            rule: Arc::clone(rule),
            values,
        }
    }

    pub fn constant(rule: &Arc<QuadratureRule>, c: f64) -> Self {
        Self {
            rule: Arc::clone(rule),
            values: vec![c; rule.len()],
        }
    }

    #[inline]
    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `int f dnu_d` by quadrature; exact for polynomials of degree
    /// `<= 2n - 1`.
    pub fn integrate(&self) -> f64 {
        self.values
            .iter()
            .zip(self.rule.weights())
            .map(|(&v, &w)| v * w)
            .sum()
    }

    /// `(int |f|^p dnu_d)^(1/p)` for `p >= 1`.
    pub fn norm(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::Domain("norm exponent must satisfy p >= 1"));
        }
        if p == 1.0 {
            return Ok(self
                .values
                .iter()
                .zip(self.rule.weights())
                .map(|(&v, &w)| w * libm::fabs(v))
                .sum());
        }
        if p == 2.0 {
            let s: f64 = self
                .values
                .iter()
                .zip(self.rule.weights())
                .map(|(&v, &w)| w * v * v)
                .sum();
            return Ok(libm::sqrt(s));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(self.rule.weights())
            .map(|(&v, &w)| w * libm::pow(libm::fabs(v), p))
            .sum();
        Ok(libm::pow(s, 1.0 / p))
    }

    /// Pointwise map, keeping the rule.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            rule: Arc::clone(&self.rule),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Binary pointwise combination; the rules must match.
    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if !self.rule.same_discretization(&other.rule) {
            return Err(Error::Mismatch("nodal functions on different rules"));
        }
        Ok(Self {
            rule: Arc::clone(&self.rule),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}
