//! Algebraic certificates behind the sharp constant.
//!
//! Everything here is exact algebra rather than quadrature: the critical
//! exponents `2*` and `2#`, the reduced discriminant of the rigidity
//! argument (a quadratic in the substitution exponent `beta` whose
//! negativity certifies that only constants are extremal), the improved
//! constant on antipodally symmetric functions, and the pointwise quantity
//! `h` together with its sum-of-squares decomposition.
//!
//! The acceptance values of this module are exact rationals, so every
//! formula is additionally implemented over `Ratio<i64>`; the float and
//! rational routes are tested against each other.

use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::measure::{Dim, NodalFn};
use crate::spectral::Basis;
use crate::{functionals, Error, Result};

/// Exact rational scalar used by the certificate formulas.
pub type Rational = Ratio<i64>;

/// Critical Sobolev exponent `2* = 2d/(d-2)` for `d > 2`, infinite
/// otherwise.
pub fn two_star(d: Dim) -> f64 {
    let d = d.get();
    if d > 2.0 {
        2.0 * d / (d - 2.0)
    } else {
        f64::INFINITY
    }
}

/// Threshold `2# = (2d^2+1)/(d-1)^2` of the pointwise sum-of-squares
/// argument, infinite at `d = 1`.
pub fn two_sharp(d: Dim) -> f64 {
    let d = d.get();
    if d > 1.0 {
        (2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0))
    } else {
        f64::INFINITY
    }
}

/// Both critical exponents, `(2*, 2#)`.
pub fn critical_exponents(d: Dim) -> (f64, f64) {
    (two_star(d), two_sharp(d))
}

/// Exact critical exponents; `None` encodes infinity.
pub fn critical_exponents_exact(d: Rational) -> (Option<Rational>, Option<Rational>) {
    let two = Rational::from_integer(2);
    let one = Rational::one();
    let star = if d > two {
        Some(two * d / (d - two))
    } else {
        None
    };
    let sharp = if d > one {
        Some((two * d * d + one) / ((d - one) * (d - one)))
    } else {
        None
    };
    (star, sharp)
}

/// The reduced-discriminant certificate at a given substitution exponent
/// `beta`. The rigidity identity has the form
/// `a X + 2 b Y + c Z = 0` with `a = 1`, and `delta = b^2 - a c` also equals
/// `A beta^2 + B beta + 1`; `delta < 0` makes the identity a definite
/// quadratic form and certifies that only constants are extremal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminantReport {
    pub p: f64,
    pub d: f64,
    pub beta: f64,
    /// Lagrange-multiplier scale `lambda = d / ((p-2) beta)`.
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Coefficients of `delta` as a quadratic in `beta`.
    pub big_a: f64,
    pub big_b: f64,
    pub delta: f64,
    pub feasible: bool,
}

/// Quadratic coefficients `A`, `B` of `delta(beta) = A beta^2 + B beta + 1`.
fn quadratic_coeffs(p: f64, d: f64) -> (f64, f64) {
    let r = (d - 1.0) / (d + 2.0);
    let big_a = (p - 1.0) * (p - 1.0) * r * r - p + 2.0;
    let big_b = p - 3.0 - d * (p - 1.0) / (d + 2.0);
    (big_a, big_b)
}

pub fn discriminant(p: f64, d: Dim, beta: f64) -> Result<DiscriminantReport> {
    if p == 2.0 {
        return Err(Error::Domain("discriminant is undefined at p = 2"));
    }
    if beta == 0.0 {
        return Err(Error::Domain("substitution exponent beta must be nonzero"));
    }
    let df = d.get();
    let d_over_lambda = (p - 2.0) * beta;
    let lambda = df / d_over_lambda;
    let a = 1.0;
    let b = -(beta + d_over_lambda) * (df - 1.0) / (df + 2.0);
    let c = (beta + d_over_lambda) * df / (df + 2.0) + (beta - 1.0) * (1.0 + d_over_lambda);
    let (big_a, big_b) = quadratic_coeffs(p, df);
    let delta = b * b - a * c;
    Ok(DiscriminantReport {
        p,
        d: df,
        beta,
        lambda,
        a,
        b,
        c,
        big_a,
        big_b,
        delta,
        feasible: delta < 0.0,
    })
}

/// Exact-rational version of [`DiscriminantReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminantReportExact {
    pub p: Rational,
    pub d: Rational,
    pub beta: Rational,
    pub lambda: Rational,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub big_a: Rational,
    pub big_b: Rational,
    pub delta: Rational,
    pub feasible: bool,
}

pub fn discriminant_exact(
    p: Rational,
    d: Rational,
    beta: Rational,
) -> Result<DiscriminantReportExact> {
    let one = Rational::one();
    let two = Rational::from_integer(2);
    let three = Rational::from_integer(3);
    if p == two {
        return Err(Error::Domain("discriminant is undefined at p = 2"));
    }
    if beta.is_zero() {
        return Err(Error::Domain("substitution exponent beta must be nonzero"));
    }
    let d_over_lambda = (p - two) * beta;
    let lambda = d / d_over_lambda;
    let a = one;
    let b = -(beta + d_over_lambda) * (d - one) / (d + two);
    let c = (beta + d_over_lambda) * d / (d + two) + (beta - one) * (one + d_over_lambda);
    let r = (d - one) / (d + two);
    let big_a = (p - one) * (p - one) * r * r - p + two;
    let big_b = p - three - d * (p - one) / (d + two);
    let delta = b * b - a * c;
    debug_assert_eq!(delta, big_a * beta * beta + big_b * beta + one);
    Ok(DiscriminantReportExact {
        p,
        d,
        beta,
        lambda,
        a,
        b,
        c,
        big_a,
        big_b,
        delta,
        feasible: delta < Rational::zero(),
    })
}

/// Searches for a `beta` with `delta(beta) < 0`.
///
/// `delta` is an explicit quadratic, so no iteration is needed: when the
/// parabola opens upward the vertex is tested, when it is degenerate or
/// opens downward an explicit feasible point is returned. A feasible `beta`
/// exists exactly when `B^2 - 4A > 0`, i.e. for `1 < p < 2*`.
pub fn find_beta(p: f64, d: Dim) -> Option<f64> {
    let (big_a, big_b) = quadratic_coeffs(p, d.get());
    let delta_at = |beta: f64| big_a * beta * beta + big_b * beta + 1.0;
    let candidate = if big_a > 0.0 {
        let disc = big_b * big_b - 4.0 * big_a;
        if disc <= 0.0 {
            return None;
        }
        -big_b / (2.0 * big_a)
    } else if big_a == 0.0 {
        if big_b == 0.0 {
            return None;
        }
        -2.0 / big_b
    } else {
        // opens downward: delta(0) = 1 > 0, so go past the larger root
        let s = libm::sqrt(big_b * big_b - 4.0 * big_a);
        (-big_b - s) / (2.0 * big_a) + 1.0
    };
    (delta_at(candidate) < 0.0 && candidate != 0.0).then_some(candidate)
}

/// Coefficient `alpha = 1 - (p-1)(d-1)^2 / (d(d+2))` of the improved
/// inequality; positive exactly when `p < 2#` and zero at `p = 2#`.
pub fn alpha_improved(p: f64, d: Dim) -> f64 {
    let d = d.get();
    1.0 - (p - 1.0) * (d - 1.0) * (d - 1.0) / (d * (d + 2.0))
}

/// Weights of the sum-of-squares decomposition
/// `h = alpha |f''|^2 + w | (d-1)/sqrt(d) f'' - sqrt(d) |f'|^2/f |^2`
/// with `w = (p-1)/(d+2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SosSplit {
    pub alpha: f64,
    pub residual_weight: f64,
}

impl SosSplit {
    pub fn new(p: f64, d: Dim) -> Self {
        Self {
            alpha: alpha_improved(p, d),
            residual_weight: (p - 1.0) / (d.get() + 2.0),
        }
    }
}

pub fn alpha_improved_exact(p: Rational, d: Rational) -> Rational {
    let one = Rational::one();
    let two = Rational::from_integer(2);
    one - (p - one) * (d - one) * (d - one) / (d * (d + two))
}

/// Improved interpolation constant `d + alpha (d+2)` valid on antipodally
/// symmetric functions; equals `d` at `p = 2#`.
pub fn improved_constant(p: f64, d: Dim) -> Result<f64> {
    if p > two_sharp(d) {
        return Err(Error::Domain("improved constant requires p <= 2#"));
    }
    Ok(d.get() + alpha_improved(p, d) * (d.get() + 2.0))
}

/// Determinant of the 2x2 quadratic form underlying `h` in the variables
/// `(f'', |f'|^2/f)`; its sign flips exactly at `p = 2#`.
pub fn h_form_determinant(p: f64, d: Dim) -> f64 {
    let d = d.get();
    let r = (d - 1.0) / (d + 2.0);
    (p - 1.0) * d / (d + 2.0) - (p - 1.0) * (p - 1.0) * r * r
}

pub fn h_form_determinant_exact(p: Rational, d: Rational) -> Rational {
    let one = Rational::one();
    let two = Rational::from_integer(2);
    let r = (d - one) / (d + two);
    (p - one) * d / (d + two) - (p - one) * (p - one) * r * r
}

/// Pointwise quantity
/// `h = |f''|^2 + (p-1) d/(d+2) |f'|^4/f^2 - 2 (p-1) (d-1)/(d+2) |f'|^2 f''/f`
/// from explicitly supplied derivative values.
pub fn pointwise_h_values(f: &[f64], f1: &[f64], f2: &[f64], p: f64, d: f64) -> Vec<f64> {
    let ca = (p - 1.0) * d / (d + 2.0);
    let cb = 2.0 * (p - 1.0) * (d - 1.0) / (d + 2.0);
    f.iter()
        .zip(f1)
        .zip(f2)
        .map(|((&v, &v1), &v2)| {
            let s = v1 * v1 / v;
            v2 * v2 + ca * s * s - cb * s * v2
        })
        .collect()
}

/// Nodal values of `h` for a positive sampled function, with derivatives
/// taken spectrally.
pub fn pointwise_h(basis: &Basis, f: &NodalFn, p: &functionals::Exponent) -> Result<NodalFn> {
    if basis.d() != p.d() {
        return Err(Error::Mismatch("exponent and basis dimensions differ"));
    }
    functionals::check_uniformly_positive(f, "pointwise h")?;
    let hat = basis.to_spectral(f)?;
    let f1 = basis.derivative_of(&hat);
    let f2 = basis.second_derivative_of(&hat);
    let values = pointwise_h_values(f.values(), f1.values(), f2.values(), p.p(), p.d().get());
    NodalFn::new(f.rule(), values)
}

/// Reconstruction of `h` from its sum-of-squares decomposition
/// `h = alpha |f''|^2 + (p-1)/(d+2) | (d-1)/sqrt(d) f'' - sqrt(d) |f'|^2/f |^2`.
/// Must agree with [`pointwise_h`] to rounding error.
pub fn sos_check(basis: &Basis, f: &NodalFn, p: &functionals::Exponent) -> Result<NodalFn> {
    if basis.d() != p.d() {
        return Err(Error::Mismatch("exponent and basis dimensions differ"));
    }
    functionals::check_uniformly_positive(f, "sum-of-squares split")?;
    let d = p.d().get();
    let split = SosSplit::new(p.p(), p.d());
    let sq = libm::sqrt(d);
    let hat = basis.to_spectral(f)?;
    let f1 = basis.derivative_of(&hat);
    let f2 = basis.second_derivative_of(&hat);
    let values = f
        .values()
        .iter()
        .zip(f1.values())
        .zip(f2.values())
        .map(|((&v, &v1), &v2)| {
            let resid = (d - 1.0) / sq * v2 - sq * v1 * v1 / v;
            split.alpha * v2 * v2 + split.residual_weight * resid * resid
        })
        .collect();
    NodalFn::new(f.rule(), values)
}

/// One row of the exponent-threshold curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub d: f64,
    pub two_sharp: f64,
    /// Present only when the whole scan stays in `d > 2`.
    pub two_star: Option<f64>,
}

/// Samples `d -> 2#(d)` (and `d -> 2*(d)` when `d_min > 2`) on a uniform
/// grid, ready for CSV emission.
pub fn figure_curves(d_min: f64, d_max: f64, steps: usize) -> Result<Vec<FigureRow>> {
    if !(d_min.is_finite() && d_max.is_finite()) || d_min < 1.0 || d_max <= d_min || steps < 2 {
        return Err(Error::Domain(
            "figure scan needs 1 <= d_min < d_max and steps >= 2",
        ));
    }
    let with_star = d_min > 2.0;
    let h = (d_max - d_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let d = if i + 1 == steps {
                d_max
            } else {
                d_min + h * i as f64
            };
            let dim = Dim::new(d).expect("grid stays within d >= 1");
            FigureRow {
                d,
                two_sharp: two_sharp(dim),
                two_star: with_star.then(|| two_star(dim)),
            }
        })
        .collect())
}
