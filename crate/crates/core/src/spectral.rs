//! Orthonormal Gegenbauer eigenbasis of the ultraspherical operator.
//!
//! The basis functions `c_k` are the polynomials orthonormal in
//! `L^2(nu_d)`; they satisfy `L c_k = -lambda_k c_k` with
//! `lambda_k = k (d + k - 1)`. Applying `L` or the heat semigroup is
//! therefore diagonal in coefficient space, which keeps the identity checks
//! of the toolkit at machine precision on the resolved subspace. Node
//! values of `c_k`, `c_k'` and `c_k''` are tabulated from the three-term
//! recurrence and its derivatives.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::measure::{jacobi_offdiag, Dim, NodalFn, QuadratureRule};
use crate::{Error, Result};

/// Eigenvalue `lambda_k = k (d + k - 1)` of `-L`.
pub fn eigenvalue(k: usize, d: Dim) -> f64 {
    let k = k as f64;
    k * (d.get() + k - 1.0)
}

/// Fraction of spectral energy carried by the top 10% of coefficients.
/// Used as a resolution guard: nonlinear operations can excite high modes,
/// and a large tail means nodal values no longer determine the function.
pub fn tail_energy_fraction(coeffs: &[f64]) -> f64 {
    let total: f64 = coeffs.iter().map(|a| a * a).sum();
    if total == 0.0 {
        return 0.0;
    }
    let m = (coeffs.len() / 10).max(1);
    let tail: f64 = coeffs[coeffs.len() - m..].iter().map(|a| a * a).sum();
    tail / total
}

/// Energy fraction above which a function counts as under-resolved.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Coefficients in the orthonormal eigenbasis `{c_k}` of `L^2(nu_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFn {
    d: Dim,
    coeffs: Vec<f64>,
}

impl SpectralFn {
    pub fn new(d: Dim, coeffs: Vec<f64>) -> Self {
        Self { d, coeffs }
    }

    #[inline]
    pub fn d(&self) -> Dim {
        self.d
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `||f||_2^2` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    /// Dirichlet energy `int |f'|^2 nu dnu_d = sum lambda_k a_k^2`.
    pub fn dirichlet(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| eigenvalue(k, self.d) * a * a)
            .sum()
    }

    /// Mean `int f dnu_d`, i.e. the coefficient of the constant mode.
    pub fn mean(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Exact heat semigroup `e^{tL}`: coefficients decay as
    /// `a_k e^{-lambda_k t}`. The mass coefficient `a_0` is untouched.
    pub fn heat(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain("heat semigroup requires t >= 0"));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * libm::exp(-eigenvalue(k, self.d) * t))
            .collect();
        Ok(Self { d: self.d, coeffs })
    }

    pub fn tail_fraction(&self) -> f64 {
        tail_energy_fraction(&self.coeffs)
    }

    pub fn well_resolved(&self) -> bool {
        self.tail_fraction() <= TAIL_TOLERANCE
    }

    /// Evaluates the function and its first two derivatives at an arbitrary
    /// point by the recurrence, independent of any quadrature rule. Used to
    /// integrate flow quantities against the shifted measures `nu_{d+2}`,
    /// `nu_{d+4}`.
    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let d = self.d.get();
        let n = self.coeffs.len();
        if n == 0 {
            return (0.0, 0.0, 0.0);
        }
        let (mut f, mut f1, mut f2) = (self.coeffs[0], 0.0, 0.0);
        if n == 1 {
            return (f, f1, f2);
        }
        // p_{k+1} = (x p_k - b_k p_{k-1}) / b_{k+1}, differentiated twice.
        let mut b_prev = jacobi_offdiag(d, 1);
        let (mut p_prev, mut q_prev, mut r_prev) = (1.0, 0.0, 0.0);
        let (mut p, mut q, mut r) = (x / b_prev, 1.0 / b_prev, 0.0);
        f += self.coeffs[1] * p;
        f1 += self.coeffs[1] * q;
        for k in 1..n - 1 {
            let b_next = jacobi_offdiag(d, k + 1);
            let p_next = (x * p - b_prev * p_prev) / b_next;
            let q_next = (p + x * q - b_prev * q_prev) / b_next;
            let r_next = (2.0 * q + x * r - b_prev * r_prev) / b_next;
            p_prev = p;
            q_prev = q;
            r_prev = r;
            p = p_next;
            q = q_next;
            r = r_next;
            b_prev = b_next;
            f += self.coeffs[k + 1] * p;
            f1 += self.coeffs[k + 1] * q;
            f2 += self.coeffs[k + 1] * r;
        }
        (f, f1, f2)
    }
}

/// Tabulated orthonormal basis on a quadrature rule, up to degree `kmax`.
#[derive(Debug)]
pub struct Basis {
    rule: Arc<QuadratureRule>,
    kmax: usize,
    /// Row-major `(kmax+1) x n` tables of `c_k`, `c_k'`, `c_k''` at nodes.
    values: Vec<f64>,
    deriv1: Vec<f64>,
    deriv2: Vec<f64>,
    lambda: Vec<f64>,
}

impl Basis {
    /// Builds the basis; `kmax <= n/2` guards against aliasing in the
    /// discrete inner products.
    pub fn new(rule: &Arc<QuadratureRule>, kmax: usize) -> Result<Self> {
        let n = rule.len();
        if kmax > n / 2 {
            return Err(Error::DegreeOverflow { kmax, limit: n / 2 });
        }
        Self::build(rule, kmax)
    }

    /// Full-degree basis, `kmax = n - 1`. The Gauss rule integrates
    /// products of two basis polynomials exactly up to this degree, so the
    /// discrete transform is an exact orthogonal change of coordinates on
    /// nodal space. Quadratic functionals of the interpolant (Dirichlet
    /// energy, `L^2` norm) are then exact for arbitrary nodal data; only
    /// projections of nonlinear products need the stricter `n/2` guard of
    /// [`Basis::new`]. The minimizer uses this to keep every nodal degree
    /// of freedom visible to its objective.
    pub fn full(rule: &Arc<QuadratureRule>) -> Result<Self> {
        Self::build(rule, rule.len() - 1)
    }

    fn build(rule: &Arc<QuadratureRule>, kmax: usize) -> Result<Self> {
        let n = rule.len();
        let d = rule.d().get();
        let rows = kmax + 1;
        let mut values = vec![0.0; rows * n];
        let mut deriv1 = vec![0.0; rows * n];
        let mut deriv2 = vec![0.0; rows * n];

        for (i, &x) in rule.nodes().iter().enumerate() {
            values[i] = 1.0;
            if kmax >= 1 {
                let b1 = jacobi_offdiag(d, 1);
                values[n + i] = x / b1;
                deriv1[n + i] = 1.0 / b1;
            }
            for k in 1..kmax {
                let b_k = jacobi_offdiag(d, k);
                let b_next = jacobi_offdiag(d, k + 1);
                let (p_prev, q_prev, r_prev) = (
                    values[(k - 1) * n + i],
                    deriv1[(k - 1) * n + i],
                    deriv2[(k - 1) * n + i],
                );
                let (p, q, r) = (values[k * n + i], deriv1[k * n + i], deriv2[k * n + i]);
                values[(k + 1) * n + i] = (x * p - b_k * p_prev) / b_next;
                deriv1[(k + 1) * n + i] = (p + x * q - b_k * q_prev) / b_next;
                deriv2[(k + 1) * n + i] = (2.0 * q + x * r - b_k * r_prev) / b_next;
            }
        }

        let dim = rule.d();
        let lambda = (0..rows).map(|k| eigenvalue(k, dim)).collect();
        Ok(Self {
            rule: Arc::clone(rule),
            kmax,
            values,
            deriv1,
            deriv2,
            lambda,
        })
    }

    #[inline]
    pub fn d(&self) -> Dim {
        self.rule.d()
    }

    #[inline]
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    #[inline]
    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    #[inline]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    /// Node values of `c_k`.
    pub fn mode(&self, k: usize) -> Result<NodalFn> {
        if k > self.kmax {
            return Err(Error::DegreeOverflow {
                kmax: k,
                limit: self.kmax,
            });
        }
        let n = self.rule.len();
        NodalFn::new(&self.rule, self.values[k * n..(k + 1) * n].to_vec())
    }

    fn check_rule(&self, f: &NodalFn) -> Result<()> {
        if self.rule.same_discretization(f.rule()) {
            Ok(())
        } else {
            Err(Error::Mismatch("nodal function built on a different rule"))
        }
    }

    /// Discrete analysis: `a_k = sum_i w_i f_i c_k(x_i)`; exact for
    /// polynomials of degree `<= kmax`.
    pub fn to_spectral(&self, f: &NodalFn) -> Result<SpectralFn> {
        self.check_rule(f)?;
        let n = self.rule.len();
        let w = self.rule.weights();
        let mut coeffs = vec![0.0; self.kmax + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let row = &self.values[k * n..(k + 1) * n];
            *c = f
                .values()
                .iter()
                .zip(w)
                .zip(row)
                .map(|((&fv, &wv), &cv)| wv * fv * cv)
                .sum();
        }
        Ok(SpectralFn::new(self.rule.d(), coeffs))
    }

    /// Synthesis back to node values.
    pub fn to_nodal(&self, f: &SpectralFn) -> Result<NodalFn> {
        if f.d() != self.rule.d() {
            return Err(Error::Mismatch(
                "spectral function has a different dimension",
            ));
        }
        if f.coeffs().len() > self.kmax + 1 {
            return Err(Error::DegreeOverflow {
                kmax: f.coeffs().len() - 1,
                limit: self.kmax,
            });
        }
        Ok(self.synth(f.coeffs(), &self.values))
    }

    fn synth(&self, coeffs: &[f64], table: &[f64]) -> NodalFn {
        let n = self.rule.len();
        let mut out = vec![0.0; n];
        for (k, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(&table[k * n..(k + 1) * n]) {
                *o += a * t;
            }
        }
        NodalFn::new(&self.rule, out).expect("constructed with matching length")
    }

    /// Spectral differentiation; exact for resolved polynomials.
    pub fn derivative(&self, f: &NodalFn) -> Result<NodalFn> {
        let hat = self.to_spectral(f)?;
        Ok(self.synth(hat.coeffs(), &self.deriv1))
    }

    /// Second spectral derivative.
    pub fn second_derivative(&self, f: &NodalFn) -> Result<NodalFn> {
        let hat = self.to_spectral(f)?;
        Ok(self.synth(hat.coeffs(), &self.deriv2))
    }

    pub fn derivative_of(&self, hat: &SpectralFn) -> NodalFn {
        self.synth(hat.coeffs(), &self.deriv1)
    }

    pub fn second_derivative_of(&self, hat: &SpectralFn) -> NodalFn {
        self.synth(hat.coeffs(), &self.deriv2)
    }

    /// `L f` applied diagonally in the eigenbasis: `-lambda_k a_k`.
    pub fn apply_l(&self, f: &NodalFn) -> Result<NodalFn> {
        let hat = self.to_spectral(f)?;
        let coeffs: Vec<f64> = hat
            .coeffs()
            .iter()
            .zip(&self.lambda)
            .map(|(&a, &l)| -l * a)
            .collect();
        Ok(self.synth(&coeffs, &self.values))
    }

    pub fn apply_l_spectral(&self, hat: &SpectralFn) -> SpectralFn {
        let coeffs = hat
            .coeffs()
            .iter()
            .zip(&self.lambda)
            .map(|(&a, &l)| -l * a)
            .collect();
        SpectralFn::new(self.rule.d(), coeffs)
    }

    /// `L f` through its differential form `nu f'' - d x f'`, as an
    /// independent route for consistency checks against the diagonal
    /// application.
    pub fn apply_l_differential(&self, f: &NodalFn) -> Result<NodalFn> {
        let hat = self.to_spectral(f)?;
        let f1 = self.synth(hat.coeffs(), &self.deriv1);
        let f2 = self.synth(hat.coeffs(), &self.deriv2);
        let d = self.rule.d().get();
        let values = self
            .rule
            .nodes()
            .iter()
            .zip(f1.values().iter().zip(f2.values()))
            .map(|(&x, (&v1, &v2))| (1.0 - x * x) * v2 - d * x * v1)
            .collect();
        NodalFn::new(&self.rule, values)
    }
}
