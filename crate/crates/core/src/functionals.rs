//! Scalar functionals of the interpolation family.
//!
//! All functionals are phrased on (-1, 1) with the measure `nu_d` and the
//! Dirichlet form `int |f'|^2 nu dnu_d`, `nu(x) = 1 - x^2`:
//!
//! * the interpolation quotient `Q_p`, whose infimum over non-constant
//!   functions equals one for `p` up to the critical exponent,
//! * the logarithmic-Sobolev ratio (the `p -> 2` limit of `Q_p`),
//! * the exponential-class (Onofri-type) deficit for `d <= 2`,
//! * the entropy `F[g]` and Fisher information `I[g]` driving the flow
//!   estimates, written for `g = f^p`,
//! * the Euler-Lagrange residual of the quotient and the strengthened
//!   Fisher quadratic form.
//!
//! Near-constant inputs make the denominators of `Q_p` and the log-Sobolev
//! ratio differences of almost-equal numbers, so those paths switch to
//! mean-centred `expm1`/`log1p` evaluation; this keeps the functionals
//! usable down to perturbation amplitudes of about `1e-8`, which the
//! minimizer relies on.

use crate::certificates::{two_sharp, two_star};
use crate::measure::{Dim, NodalFn};
use crate::spectral::{Basis, SpectralFn};
use crate::{Error, Result};

/// Relative positivity threshold: a function counts as strictly positive
/// when `min f > 1e-12 * max f`.
const POSITIVITY_REL: f64 = 1e-12;

/// Relative threshold below which the quotient denominators count as zero.
const CONSTANT_REL: f64 = 1e-13;

/// Interpolation exponent paired with the dimension it lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    p: f64,
    d: Dim,
}

/// Position of `p` relative to the critical exponent `2* = 2d/(d-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentClass {
    Subcritical,
    Critical,
    Beyond,
}

impl Exponent {
    pub fn new(p: f64, d: Dim) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Self { p, d })
        } else {
            Err(Error::Domain("exponent must satisfy p >= 1"))
        }
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.p
    }

    #[inline]
    pub fn d(self) -> Dim {
        self.d
    }

    /// `2* = 2d/(d-2)` for `d > 2`, infinite otherwise.
    pub fn two_star(self) -> f64 {
        two_star(self.d)
    }

    /// `2# = (2d^2+1)/(d-1)^2` for `d > 1`, infinite otherwise.
    pub fn two_sharp(self) -> f64 {
        two_sharp(self.d)
    }

    pub fn classify(self) -> ExponentClass {
        let star = self.two_star();
        if self.p < star {
            ExponentClass::Subcritical
        } else if self.p == star {
            ExponentClass::Critical
        } else {
            ExponentClass::Beyond
        }
    }

    /// Whether the pointwise sum-of-squares argument applies (`p <= 2#`).
    pub fn flow_admissible(self) -> bool {
        self.p <= self.two_sharp()
    }
}

fn check_same_dim(basis: &Basis, p: &Exponent) -> Result<()> {
    if basis.d() == p.d() {
        Ok(())
    } else {
        Err(Error::Mismatch("exponent and basis dimensions differ"))
    }
}

/// Positivity guard for operations that only need `f > 0` pointwise
/// (fractional powers).
pub(crate) fn check_positive(f: &NodalFn, what: &'static str) -> Result<()> {
    if f.min_value() > 0.0 {
        Ok(())
    } else {
        Err(Error::Positivity(what))
    }
}

/// Stronger guard for operations that divide by `f`: the minimum must stay
/// above `1e-12` of the maximum, or the quotients `|f'|^2/f` are garbage.
pub(crate) fn check_uniformly_positive(f: &NodalFn, what: &'static str) -> Result<()> {
    let max = f.max_value();
    if max > 0.0 && f.min_value() > POSITIVITY_REL * max {
        Ok(())
    } else {
        Err(Error::Positivity(what))
    }
}

/// Dirichlet energy `int |f'|^2 nu dnu_d`, computed as `sum lambda_k a_k^2`
/// on the mean-centred projection. Centring removes the only coefficient
/// the energy ignores and with it the dominant rounding contribution for
/// near-constant data.
pub fn dirichlet(basis: &Basis, f: &NodalFn) -> Result<f64> {
    let mean = f.integrate();
    let centred = f.map(|v| v - mean);
    Ok(basis.to_spectral(&centred)?.dirichlet())
}

/// `||f||_p^2 - ||f||_2^2` with a mean-centred stable path for
/// near-constant `f`.
pub(crate) fn norms_gap(f: &NodalFn, p: f64) -> Result<f64> {
    debug_assert!(p >= 1.0);
    let m = f.integrate();
    if m != 0.0 {
        let mut umax = 0.0f64;
        for &v in f.values() {
            umax = umax.max(libm::fabs(v / m - 1.0));
        }
        if umax <= 0.3 {
            let w = f.rule().weights();
            let (mut i2, mut psi, mut lin) = (0.0, 0.0, 0.0);
            for (&v, &wt) in f.values().iter().zip(w) {
                let u = v / m - 1.0;
                i2 += wt * u * u;
                // (1+u)^p - 1 - p u, free of cancellation for |u| <= 0.3
                psi += wt * (libm::expm1(p * libm::log1p(u)) - p * u);
                lin += wt * u;
            }
            let delta = (psi + p * lin) / p;
            // ||f||_p^2 / m^2 - 1 = expm1((2/p) log1p(p delta))
            let gap = libm::expm1(2.0 / p * libm::log1p(p * delta)) - i2 - 2.0 * lin;
            return Ok(m * m * gap);
        }
    }
    let np = f.norm(p)?;
    let n2 = f.norm(2.0)?;
    Ok(np * np - n2 * n2)
}

/// Interpolation quotient
/// `Q_p[f] = ((p-2)/d) int |f'|^2 nu dnu_d / (||f||_p^2 - ||f||_2^2)`.
///
/// Invariant under `f -> c f`; undefined at `p = 2` (see [`logsob_ratio`])
/// and on constants.
pub fn quotient_qp(basis: &Basis, f: &NodalFn, p: &Exponent) -> Result<f64> {
    check_same_dim(basis, p)?;
    if p.p() == 2.0 {
        return Err(Error::Domain("p = 2 is the log-Sobolev endpoint"));
    }
    let gap = norms_gap(f, p.p())?;
    let n2 = f.norm(2.0)?;
    if libm::fabs(gap) < CONSTANT_REL * n2 * n2 {
        return Err(Error::ConstantInput);
    }
    let num = (p.p() - 2.0) / p.d().get() * dirichlet(basis, f)?;
    Ok(num / gap)
}

/// Entropy denominator `int f^2 log(f^2 / ||f||_2^2) dnu_d` with a stable
/// mean-centred path.
pub(crate) fn log_entropy_of_f(f: &NodalFn) -> Result<f64> {
    let n2sq = {
        let n2 = f.norm(2.0)?;
        n2 * n2
    };
    if n2sq == 0.0 {
        return Err(Error::ConstantInput);
    }
    let m = f.integrate();
    if m != 0.0 {
        let mut umax = 0.0f64;
        for &v in f.values() {
            umax = umax.max(libm::fabs(v / m - 1.0));
        }
        if umax <= 0.3 {
            let w = f.rule().weights();
            let (mut i2, mut core_sum, mut lin) = (0.0, 0.0, 0.0);
            for (&v, &wt) in f.values().iter().zip(w) {
                let u = v / m - 1.0;
                i2 += wt * u * u;
                lin += wt * u;
                // (1+u)^2 log(1+u) - u = O(u^2)
                let s = 1.0 + u;
                core_sum += wt * (s * s * libm::log1p(u) - u);
            }
            let i2c = i2 + 2.0 * lin;
            return Ok(m * m * (2.0 * (core_sum + lin) - (1.0 + i2c) * libm::log1p(i2c)));
        }
    }
    let mut e = 0.0;
    for (&v, &wt) in f.values().iter().zip(f.rule().weights()) {
        let v2 = v * v;
        if v2 > 0.0 {
            e += wt * v2 * libm::log(v2 / n2sq);
        }
    }
    Ok(e)
}

/// Logarithmic-Sobolev ratio
/// `(2/d) int |f'|^2 nu dnu_d / int f^2 log(f^2/||f||_2^2) dnu_d`,
/// normalized so that the sharp inequality reads `ratio >= 1`.
pub fn logsob_ratio(basis: &Basis, f: &NodalFn) -> Result<f64> {
    let entropy = log_entropy_of_f(f)?;
    let n2 = f.norm(2.0)?;
    if libm::fabs(entropy) < CONSTANT_REL * n2 * n2 {
        return Err(Error::ConstantInput);
    }
    let num = 2.0 / basis.d().get() * dirichlet(basis, f)?;
    Ok(num / entropy)
}

/// Exponential-class deficit
/// `(1/(2d)) int |v'|^2 nu dnu_d - log int exp(v - vbar) dnu_d`
/// for `d <= 2`; nonnegative, vanishing on constants.
pub fn onofri_deficit(basis: &Basis, v: &NodalFn) -> Result<f64> {
    let d = basis.d().get();
    if d > 2.0 {
        return Err(Error::Domain(
            "the exponential-class inequality needs d <= 2",
        ));
    }
    let vbar = v.integrate();
    let exp_int = v.map(|t| libm::exp(t - vbar)).integrate();
    Ok(dirichlet(basis, v)? / (2.0 * d) - libm::log(exp_int))
}

/// Entropy `F[g] = d (||g||_1^{2/p} - ||g^{2/p}||_1) / (p - 2)` for
/// `g = f^p > 0`; nonnegative and zero exactly on constants.
pub fn entropy_f(g: &NodalFn, p: &Exponent) -> Result<f64> {
    if p.p() == 2.0 {
        return Err(Error::Domain("p = 2 entropy is the log entropy"));
    }
    check_positive(g, "entropy of g")?;
    let d = p.d().get();
    let pw = p.p();
    let two_alpha = 2.0 / pw;
    let m = g.integrate();
    let mut hmax = 0.0f64;
    for &v in g.values() {
        hmax = hmax.max(libm::fabs(v / m - 1.0));
    }
    if hmax <= 0.3 {
        let (mut psi, mut lin) = (0.0, 0.0);
        for (&v, &wt) in g.values().iter().zip(g.rule().weights()) {
            let h = v / m - 1.0;
            psi += wt * (libm::expm1(two_alpha * libm::log1p(h)) - two_alpha * h);
            lin += wt * h;
        }
        return Ok(-d * libm::pow(m, two_alpha) * (psi + two_alpha * lin) / (pw - 2.0));
    }
    let n1 = g.norm(1.0)?;
    let frac = g.map(|v| libm::pow(v, two_alpha)).integrate();
    Ok(d * (libm::pow(n1, two_alpha) - frac) / (pw - 2.0))
}

/// `p -> 2` limit of [`entropy_f`]:
/// `(d/2) int g log(g / int g) dnu_d` for `g = f^2`.
pub fn log_entropy(g: &NodalFn) -> Result<f64> {
    check_positive(g, "log entropy of g")?;
    let d = g.rule().d().get();
    let sqrt_g = g.map(libm::sqrt);
    Ok(d / 2.0 * log_entropy_of_f(&sqrt_g)?)
}

/// Fisher information `I[g] = int |(g^{1/p})'|^2 nu dnu_d`.
pub fn fisher_i(basis: &Basis, g: &NodalFn, p: &Exponent) -> Result<f64> {
    check_same_dim(basis, p)?;
    check_positive(g, "Fisher information of g")?;
    let f = g.map(|v| libm::pow(v, 1.0 / p.p()));
    dirichlet(basis, &f)
}

/// Euler-Lagrange residual `-(p-2)/d L f + f - f^{p-1}` with `f`
/// normalized to `||f||_p = 1`; identically zero on constants and at the
/// asymptotic profile of the flow.
pub fn el_residual(basis: &Basis, f: &NodalFn, p: &Exponent) -> Result<NodalFn> {
    check_same_dim(basis, p)?;
    if p.p() == 2.0 {
        return Err(Error::Domain("Euler-Lagrange residual needs p != 2"));
    }
    check_positive(f, "Euler-Lagrange residual")?;
    let scale = f.norm(p.p())?;
    let fn_ = f.map(|v| v / scale);
    let lf = basis.apply_l(&fn_)?;
    let c = (p.p() - 2.0) / p.d().get();
    let pm1 = p.p() - 1.0;
    fn_.zip_with(&lf, |v, l| -c * l + v - libm::pow(v, pm1))
}

/// Left side of the strengthened Fisher-information inequality
/// `<Lf,Lf> + (p-1) <(|f'|^2/f) nu, Lf> + d <f,Lf> >= 0` (valid for
/// `p <= 2#`).
pub fn fisher_form(basis: &Basis, f: &NodalFn, p: &Exponent) -> Result<f64> {
    check_same_dim(basis, p)?;
    check_uniformly_positive(f, "Fisher form")?;
    let mean = f.integrate();
    let hat = basis.to_spectral(&f.map(|v| v - mean))?;
    let lam = basis.eigenvalues();
    let l2: f64 = hat
        .coeffs()
        .iter()
        .zip(lam)
        .map(|(&a, &l)| l * l * a * a)
        .sum();
    let dir = hat.dirichlet();

    let f1 = basis.derivative_of(&hat);
    let mut shifted = hat.coeffs().to_vec();
    shifted[0] += mean;
    let lf = basis.apply_l_spectral(&SpectralFn::new(basis.d(), shifted));
    let lf_nodal = basis.to_nodal(&lf)?;
    let rule = basis.rule();
    let mut middle = 0.0;
    for i in 0..rule.len() {
        let x = rule.nodes()[i];
        let fp = f1.values()[i];
        middle +=
            rule.weights()[i] * fp * fp / f.values()[i] * (1.0 - x * x) * lf_nodal.values()[i];
    }
    Ok(l2 + (p.p() - 1.0) * middle - p.d().get() * dir)
}
