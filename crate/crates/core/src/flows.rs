//! Entropy/Fisher decay along the heat flow and the hypercontractivity
//! experiments.
//!
//! The flow `dg/dt = L g` with `g = f^p` is integrated exactly through the
//! spectral semigroup, so its traces serve as the oracle for everything
//! else: the equivalent nonlinear flow in `f` (cross-checked by an
//! exponential two-stage integrator), the decay estimates
//! `F(t) <= F(0) e^{-2dt}` and `dI/dt <= -2dI`, the improved rate on
//! antipodally symmetric data, and the norm-growth experiment behind the
//! sharp constant for `p in (1, 2)`.

use alloc::vec::Vec;

use crate::certificates::{alpha_improved, two_sharp};
use crate::functionals::{self, Exponent};
use crate::measure::{Dim, NodalFn, QuadratureRule};
use crate::spectral::{Basis, SpectralFn, TAIL_TOLERANCE};
use crate::{Error, Result};

/// Time series of entropy, Fisher information, mass and the positivity
/// monitor along a flow.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub p: f64,
    pub d: f64,
    pub times: Vec<f64>,
    /// Entropy `F[g(t)]` (log entropy at `p = 2`).
    pub entropy: Vec<f64>,
    /// Fisher information `I[g(t)]`.
    pub fisher: Vec<f64>,
    /// `int g dnu_d`, conserved by the flow.
    pub mass: Vec<f64>,
    /// `min_x g(t, x)` at the nodes.
    pub min_g: Vec<f64>,
}

/// Which column of a [`FlowTrace`] a rate fit applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Entropy,
    Fisher,
}

/// Uniform grid `0 = t_0 < ... < t_{n-1} = t_max`.
pub fn uniform_grid(t_max: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2 && t_max > 0.0);
    let h = t_max / (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            if i + 1 == samples {
                t_max
            } else {
                h * i as f64
            }
        })
        .collect()
}

/// Geometric grid: `t_0 = 0`, then samples log-spaced over
/// `[t_max/100, t_max]`. Resolves the initial transient without starving
/// the asymptotic regime.
pub fn geometric_grid(t_max: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2 && t_max > 0.0);
    if samples == 2 {
        return alloc::vec![0.0, t_max];
    }
    let ratio = libm::pow(0.01, 1.0 / (samples - 2) as f64);
    (0..samples)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                t_max * libm::pow(ratio, (samples - 1 - i) as f64)
            }
        })
        .collect()
}

/// Time horizon `5/(2d)` covering several e-foldings of the slowest mode.
pub fn default_t_max(d: Dim) -> f64 {
    2.5 / d.get()
}

/// Default trace grid: geometric, 40 samples on `[0, 5/(2d)]`.
pub fn default_time_grid(d: Dim) -> Vec<f64> {
    geometric_grid(default_t_max(d), 40)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(Error::Domain("time grid must start at 0"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Entropy, Fisher information, mass and minimum of a state `g`.
fn observe(basis: &Basis, g: &NodalFn, p: &Exponent) -> Result<(f64, f64, f64, f64)> {
    let entropy = if p.p() == 2.0 {
        functionals::log_entropy(g)?
    } else {
        functionals::entropy_f(g, p)?
    };
    let fisher = functionals::fisher_i(basis, g, p)?;
    Ok((entropy, fisher, g.integrate(), g.min_value()))
}

/// Evolves `g = f0^p` exactly through the spectral semigroup and records
/// the trace at the given sample times.
pub fn run_heat_flow(
    basis: &Basis,
    f0: &NodalFn,
    p: &Exponent,
    t_grid: &[f64],
) -> Result<FlowTrace> {
    check_grid(t_grid)?;
    functionals::check_positive(f0, "heat flow initial datum")?;
    let g0 = f0.map(|v| libm::pow(v, p.p()));
    let hat0 = basis.to_spectral(&g0)?;

    let mut trace = FlowTrace {
        p: p.p(),
        d: p.d().get(),
        times: t_grid.to_vec(),
        entropy: Vec::with_capacity(t_grid.len()),
        fisher: Vec::with_capacity(t_grid.len()),
        mass: Vec::with_capacity(t_grid.len()),
        min_g: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let g = basis.to_nodal(&hat0.heat(t)?)?;
        if g.min_value() <= 0.0 {
            return Err(Error::Positivity(
                "heat flow sample lost positivity (under-resolved)",
            ));
        }
        let (f_e, i_e, m, mg) = observe(basis, &g, p)?;
        trace.entropy.push(f_e);
        trace.fisher.push(i_e);
        trace.mass.push(m);
        trace.min_g.push(mg);
    }
    Ok(trace)
}

/// `phi_1(z) = (e^z - 1)/z` and `phi_2(z) = (e^z - 1 - z)/z^2`.
fn phi12(z: f64) -> (f64, f64) {
    if z == 0.0 {
        return (1.0, 0.5);
    }
    let em = libm::expm1(z);
    (em / z, (em - z) / (z * z))
}

/// Nonlinear right-hand side `(p-1) (f'^2 / f) nu`, projected.
fn nonlinear_term(basis: &Basis, hat: &SpectralFn, f: &NodalFn, p: f64) -> Result<SpectralFn> {
    let f1 = basis.derivative_of(hat);
    let rule = basis.rule();
    let mut values = Vec::with_capacity(rule.len());
    for i in 0..rule.len() {
        let x = rule.nodes()[i];
        let fp = f1.values()[i];
        values.push((p - 1.0) * fp * fp / f.values()[i] * (1.0 - x * x));
    }
    basis.to_spectral(&NodalFn::new(rule, values)?)
}

/// Integrates the nonlinear form `df/dt = L f + (p-1)(f'^2/f) nu` of the
/// flow with an exponential two-stage (ETD2RK) scheme and substep size at
/// most `dt`. Exists as a cross-check of [`run_heat_flow`], which is exact;
/// the two traces must agree to about `1e-6` on shared grids.
pub fn run_nonlinear_flow(
    basis: &Basis,
    f0: &NodalFn,
    p: &Exponent,
    t_grid: &[f64],
    dt: f64,
) -> Result<FlowTrace> {
    check_grid(t_grid)?;
    functionals::check_positive(f0, "nonlinear flow initial datum")?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain("substep size must be positive"));
    }
    let lam = basis.eigenvalues();
    let mut hat = basis.to_spectral(f0)?;
    let mut f = basis.to_nodal(&hat)?;

    let mut trace = FlowTrace {
        p: p.p(),
        d: p.d().get(),
        times: t_grid.to_vec(),
        entropy: Vec::with_capacity(t_grid.len()),
        fisher: Vec::with_capacity(t_grid.len()),
        mass: Vec::with_capacity(t_grid.len()),
        min_g: Vec::with_capacity(t_grid.len()),
    };

    let record = |basis: &Basis, f: &NodalFn, trace: &mut FlowTrace| -> Result<()> {
        let g = f.map(|v| libm::pow(v, p.p()));
        let (f_e, i_e, m, mg) = observe(basis, &g, p)?;
        trace.entropy.push(f_e);
        trace.fisher.push(i_e);
        trace.mass.push(m);
        trace.min_g.push(mg);
        Ok(())
    };
    record(basis, &f, &mut trace)?;

    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        let steps = libm::ceil(span / dt) as usize;
        let h = span / steps as f64;
        let coeffs: Vec<(f64, f64, f64)> = lam
            .iter()
            .map(|&l| {
                let (p1, p2) = phi12(-l * h);
                (libm::exp(-l * h), p1, p2)
            })
            .collect();
        for _ in 0..steps {
            let n0 = nonlinear_term(basis, &hat, &f, p.p())?;
            let pred: Vec<f64> = hat
                .coeffs()
                .iter()
                .zip(n0.coeffs())
                .zip(&coeffs)
                .map(|((&a, &n), &(e, p1, _))| e * a + h * p1 * n)
                .collect();
            let pred = SpectralFn::new(basis.d(), pred);
            let f_pred = basis.to_nodal(&pred)?;
            if f_pred.min_value() <= 0.0 {
                return Err(Error::StepSize("predictor lost positivity"));
            }
            let n1 = nonlinear_term(basis, &pred, &f_pred, p.p())?;
            let next: Vec<f64> = pred
                .coeffs()
                .iter()
                .zip(n1.coeffs().iter().zip(n0.coeffs()))
                .zip(&coeffs)
                .map(|((&a, (&nb, &na)), &(_, _, p2))| a + h * p2 * (nb - na))
                .collect();
            hat = SpectralFn::new(basis.d(), next);
            f = basis.to_nodal(&hat)?;
            if f.min_value() <= 0.0 {
                return Err(Error::StepSize("corrector lost positivity"));
            }
        }
        if hat.tail_fraction() > TAIL_TOLERANCE {
            return Err(Error::StepSize("spectral resolution lost"));
        }
        record(basis, &f, &mut trace)?;
    }
    Ok(trace)
}

/// Least-squares slope of `log(column)` over the samples falling in
/// `window = (t_lo, t_hi)` (inclusive). Samples with nonpositive values are
/// skipped; fewer than two usable samples is an error.
pub fn decay_rate(trace: &FlowTrace, which: Observable, window: (f64, f64)) -> Result<f64> {
    let column = match which {
        Observable::Entropy => &trace.entropy,
        Observable::Fisher => &trace.fisher,
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (&t, &y) in trace.times.iter().zip(column) {
        if t >= window.0 && t <= window.1 && y > 0.0 {
            pts.push((t, libm::log(y)));
        }
    }
    fit_slope(&pts)
}

fn fit_slope(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let n = pts.len() as f64;
    let tm: f64 = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym: f64 = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, y) in pts {
        num += (t - tm) * (y - ym);
        den += (t - tm) * (t - tm);
    }
    if den == 0.0 {
        return Err(Error::EmptyWindow);
    }
    Ok(num / den)
}

/// Outcome of the improved-decay experiment on antipodally symmetric data.
#[derive(Debug, Clone, Copy)]
pub struct ImprovedDecayReport {
    /// Fitted slope of `log I` over the last half of the horizon.
    pub fisher_slope: f64,
    /// Improved bound `-2 (d + alpha (d+2))`.
    pub improved_bound: f64,
    /// Plain bound `-2 d`.
    pub plain_bound: f64,
    /// Largest `|int f' dnu_{d+2}|` seen along the flow.
    pub max_mean_derivative: f64,
    /// Largest `|d int x f dnu_d|` seen along the flow.
    pub max_first_moment: f64,
    /// Smallest margin of the auxiliary Poincare inequality
    /// `int |f''|^2 dnu_{d+4} >= (d+2) int |f' - fbar'|^2 dnu_{d+2}`.
    pub min_poincare_margin: f64,
}

/// Verifies the improved decay rate `dI/dt <= -2 (d + alpha(d+2)) I` for
/// even initial data, together with the vanishing of the derivative mean
/// that the argument requires and the auxiliary Poincare inequality between
/// the shifted measures.
pub fn improved_decay_check(
    basis: &Basis,
    f0: &NodalFn,
    p: &Exponent,
) -> Result<ImprovedDecayReport> {
    let rule = basis.rule();
    let n = rule.len();
    let mut odd = 0.0f64;
    for i in 0..n / 2 {
        odd = odd.max(libm::fabs(f0.values()[i] - f0.values()[n - 1 - i]));
    }
    if odd > 1e-12 {
        return Err(Error::Symmetry(odd));
    }
    if p.p() > two_sharp(p.d()) {
        return Err(Error::Domain("improved decay requires p <= 2#"));
    }
    functionals::check_positive(f0, "improved decay initial datum")?;

    let d = p.d().get();
    let t_max = default_t_max(p.d());
    let grid = uniform_grid(t_max, 41);
    let trace = run_heat_flow(basis, f0, p, &grid)?;

    let rule_d2 = QuadratureRule::new(Dim::new(d + 2.0)?, n)?;
    let rule_d4 = QuadratureRule::new(Dim::new(d + 4.0)?, n)?;

    let g0 = f0.map(|v| libm::pow(v, p.p()));
    let ghat = basis.to_spectral(&g0)?;
    let mut max_mean_derivative = 0.0f64;
    let mut max_first_moment = 0.0f64;
    let mut min_poincare_margin = f64::INFINITY;
    for &t in &grid {
        let g = basis.to_nodal(&ghat.heat(t)?)?;
        let f = g.map(|v| libm::pow(v, 1.0 / p.p()));
        let fhat = basis.to_spectral(&f)?;

        let fbar_prime = rule_d2.integrate_fn(|x| fhat.eval_with_derivatives(x).1);
        let first_moment = d * f
            .values()
            .iter()
            .zip(rule.nodes().iter().zip(rule.weights()))
            .map(|(&v, (&x, &w))| w * x * v)
            .sum::<f64>();
        max_mean_derivative = max_mean_derivative.max(libm::fabs(fbar_prime));
        max_first_moment = max_first_moment.max(libm::fabs(first_moment));

        let lhs = rule_d4.integrate_fn(|x| {
            let f2 = fhat.eval_with_derivatives(x).2;
            f2 * f2
        });
        let rhs = (d + 2.0)
            * rule_d2.integrate_fn(|x| {
                let f1 = fhat.eval_with_derivatives(x).1;
                (f1 - fbar_prime) * (f1 - fbar_prime)
            });
        min_poincare_margin = min_poincare_margin.min(lhs - rhs);
    }

    let alpha = alpha_improved(p.p(), p.d());
    let slope = decay_rate(&trace, Observable::Fisher, (t_max / 2.0, t_max))?;
    Ok(ImprovedDecayReport {
        fisher_slope: slope,
        improved_bound: -2.0 * (d + alpha * (d + 2.0)),
        plain_bound: -2.0 * d,
        max_mean_derivative,
        max_first_moment,
        min_poincare_margin,
    })
}

/// Norm comparison at the hypercontractivity time
/// `t* = log(1/(p-1)) / (2d)`.
#[derive(Debug, Clone, Copy)]
pub struct HyperReport {
    pub p: f64,
    pub d: f64,
    pub t_star: f64,
    /// `||e^{t* L} u||_2`, from the spectral identity.
    pub lhs: f64,
    /// `||u||_p`, the right side required by the interpolation chain.
    pub rhs_p: f64,
    /// `||u||_{2/p}`, the alternative right side; reported, not asserted.
    pub rhs_2_over_p: f64,
    /// Gap between the spectral identity and plain quadrature for `lhs`.
    pub spectral_identity_error: f64,
}

fn check_hyper_p(p: f64) -> Result<()> {
    if p > 1.0 && p < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(
            "hypercontractivity experiment needs p in (1, 2)",
        ))
    }
}

pub fn hypercontractivity_run(basis: &Basis, u: &NodalFn, p: f64) -> Result<HyperReport> {
    check_hyper_p(p)?;
    let d = basis.d().get();
    if u.norm(2.0)? == 0.0 {
        return Err(Error::ConstantInput);
    }
    let t_star = libm::log(1.0 / (p - 1.0)) / (2.0 * d);
    let hat = basis.to_spectral(u)?;
    let evolved = hat.heat(t_star)?;
    let lhs = libm::sqrt(evolved.norm_sq());
    let quad = basis.to_nodal(&evolved)?.norm(2.0)?;
    Ok(HyperReport {
        p,
        d,
        t_star,
        lhs,
        rhs_p: u.norm(p)?,
        rhs_2_over_p: u.norm(2.0 / p)?,
        spectral_identity_error: libm::fabs(lhs - quad),
    })
}

/// The three quantities chained by the spectral proof of the sharp
/// constant for `p in (1, 2)`:
/// `(||u||_p^2 - ||u||_2^2)/(p-2) <= (||u||_2^2 - ||e^{t*L}u||_2^2)/(2-p)
///  <= (1/d) int |u'|^2 nu dnu_d`.
#[derive(Debug, Clone, Copy)]
pub struct BecknerChainReport {
    /// `(||u||_p^2 - ||u||_2^2)/(p-2)`.
    pub interpolation: f64,
    /// `(||u||_2^2 - ||e^{t*L}u||_2^2)/(2-p)`, via the spectral identity.
    pub semigroup: f64,
    /// `(1/d) int |u'|^2 nu dnu_d`.
    pub dirichlet: f64,
    /// `interpolation / dirichlet`; tends to 1 on first-mode perturbations.
    pub saturation: f64,
}

impl BecknerChainReport {
    /// Both links hold up to the given absolute slack.
    pub fn holds(&self, slack: f64) -> bool {
        self.interpolation <= self.semigroup + slack && self.semigroup <= self.dirichlet + slack
    }
}

pub fn beckner_chain_check(basis: &Basis, u: &NodalFn, p: f64) -> Result<BecknerChainReport> {
    check_hyper_p(p)?;
    let d = basis.d().get();
    let t_star = libm::log(1.0 / (p - 1.0)) / (2.0 * d);
    let interpolation = functionals::norms_gap(u, p)? / (p - 2.0);

    let mean = u.integrate();
    let hat = basis.to_spectral(&u.map(|v| v - mean))?;
    let lam = basis.eigenvalues();
    let semigroup: f64 = hat
        .coeffs()
        .iter()
        .zip(lam)
        .map(|(&a, &l)| -libm::expm1(-2.0 * l * t_star) * a * a)
        .sum::<f64>()
        / (2.0 - p);
    let dirichlet = hat.dirichlet() / d;
    Ok(BecknerChainReport {
        interpolation,
        semigroup,
        dirichlet,
        saturation: interpolation / dirichlet,
    })
}

/// Trace of the norm-growth experiment: `F(t) = ||e^{tL} u||_{p(t)}` with
/// `p(t) = 1 + (p-1) e^{2dt}` must be nonincreasing up to `t*`, where
/// `p(t*) = 2`; the bracket governing `F'` is the log-Sobolev deficit of
/// `v = |f|^{p(t)/2}` and must be nonpositive.
#[derive(Debug, Clone)]
pub struct GrossReport {
    pub t_star: f64,
    /// `p(t*)`; equals 2 identically.
    pub p_end: f64,
    pub times: Vec<f64>,
    pub norm_values: Vec<f64>,
    /// Largest increase `F(t_{i+1}) - F(t_i)` over the grid.
    pub max_step_increase: f64,
    /// Largest value of
    /// `int v^2 log(v^2/||v||_2^2) - (2/d) int |v'|^2 nu dnu_d`.
    pub max_bracket: f64,
}

pub fn gross_monotonicity_check(
    basis: &Basis,
    u: &NodalFn,
    p: f64,
    t_grid: &[f64],
) -> Result<GrossReport> {
    check_hyper_p(p)?;
    check_grid(t_grid)?;
    functionals::check_positive(u, "norm-growth experiment")?;
    let d = basis.d().get();
    let t_star = libm::log(1.0 / (p - 1.0)) / (2.0 * d);

    let mut times: Vec<f64> = t_grid.iter().copied().filter(|&t| t < t_star).collect();
    times.push(t_star);

    let hat = basis.to_spectral(u)?;
    let mut norm_values = Vec::with_capacity(times.len());
    let mut max_bracket = f64::NEG_INFINITY;
    for &t in &times {
        let p_t = 1.0 + (p - 1.0) * libm::exp(2.0 * d * t);
        let f = basis.to_nodal(&hat.heat(t)?)?;
        norm_values.push(f.norm(p_t)?);

        let v = f.map(|x| libm::pow(libm::fabs(x), p_t / 2.0));
        let entropy = functionals::log_entropy_of_f(&v)?;
        let bracket = entropy - 2.0 / d * functionals::dirichlet(basis, &v)?;
        max_bracket = max_bracket.max(bracket);
    }
    let max_step_increase = norm_values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GrossReport {
        t_star,
        p_end: 1.0 + (p - 1.0) * libm::exp(2.0 * d * t_star),
        times,
        norm_values,
        max_step_increase,
        max_bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::QuadratureRule;
    use alloc::sync::Arc;
    use approx::assert_abs_diff_eq;

    fn setup(d: f64) -> (Arc<QuadratureRule>, Basis) {
        let rule = QuadratureRule::new(Dim::new(d).unwrap(), 64).unwrap();
        let basis = Basis::new(&rule, 20).unwrap();
        (rule, basis)
    }

    fn exponent(p: f64, d: f64) -> Exponent {
        Exponent::new(p, Dim::new(d).unwrap()).unwrap()
    }

    #[test]
    fn grids_are_sane() {
        let g = uniform_grid(1.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], 1.0);
        let g = geometric_grid(2.0, 40);
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[1], 0.02, epsilon = 1e-12);
        assert_eq!(g[39], 2.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn constant_datum_is_stationary() {
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let f0 = NodalFn::constant(&rule, 1.0);
        let grid = uniform_grid(0.5, 6);
        let trace = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
        for i in 0..trace.times.len() {
            assert_abs_diff_eq!(trace.entropy[i], 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(trace.fisher[i], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(trace.mass[i], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn heat_flow_trace_invariants() {
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.1 * x);
        let grid = uniform_grid(default_t_max(p.d()), 41);
        let trace = run_heat_flow(&basis, &f0, &p, &grid).unwrap();

        let m0 = trace.mass[0];
        for (i, &t) in grid.iter().enumerate() {
            assert_abs_diff_eq!(trace.mass[i], m0, epsilon = 1e-12);
            assert!(trace.entropy[i] >= 0.0);
            assert!(trace.fisher[i] >= 0.0);
            assert!(trace.min_g[i] > 0.0);
            if i > 0 {
                assert!(trace.entropy[i] <= trace.entropy[i - 1] + 1e-14);
                assert!(trace.fisher[i] <= trace.fisher[i - 1] + 1e-14);
            }
            // exponential entropy decay and the interpolation inequality
            // F <= I along the flow
            let bound = trace.entropy[0] * libm::exp(-2.0 * 3.0 * t);
            assert!(trace.entropy[i] <= bound * (1.0 + 1e-9));
            assert!(trace.entropy[i] <= trace.fisher[i] + 1e-9);
        }
    }

    #[test]
    fn entropy_production_identity() {
        // centred difference of F matches -2 d I, refining with the grid
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.1 * x);
        let mut errs = Vec::new();
        for &samples in &[41usize, 81] {
            let grid = uniform_grid(0.4, samples);
            let trace = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
            let h = grid[1] - grid[0];
            let mut worst = 0.0f64;
            for i in 1..grid.len() - 1 {
                let df = (trace.entropy[i + 1] - trace.entropy[i - 1]) / (2.0 * h);
                let target = -2.0 * 3.0 * trace.fisher[i];
                worst = worst.max(libm::fabs(df - target) / libm::fabs(target));
            }
            assert!(worst < 0.01, "relative error {worst}");
            errs.push(worst);
        }
        assert!(
            errs[1] <= errs[0] / 2.0,
            "halving h should at least halve the error: {errs:?}"
        );
    }

    #[test]
    fn nonlinear_flow_matches_heat_flow() {
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.1 * x);
        let grid = uniform_grid(0.5, 11);
        let exact = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
        let stepped = run_nonlinear_flow(&basis, &f0, &p, &grid, 2e-4).unwrap();
        for i in 0..grid.len() {
            assert_abs_diff_eq!(exact.entropy[i], stepped.entropy[i], epsilon = 1e-6);
            assert_abs_diff_eq!(exact.fisher[i], stepped.fisher[i], epsilon = 1e-6);
            assert_abs_diff_eq!(exact.mass[i], stepped.mass[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn nonlinear_flow_runs_below_two() {
        let (rule, basis) = setup(3.0);
        let p = exponent(1.5, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.1 * x);
        let grid = uniform_grid(0.3, 7);
        let exact = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
        let stepped = run_nonlinear_flow(&basis, &f0, &p, &grid, 2e-4).unwrap();
        for i in 0..grid.len() {
            assert_abs_diff_eq!(exact.entropy[i], stepped.entropy[i], epsilon = 1e-6);
            assert_abs_diff_eq!(exact.fisher[i], stepped.fisher[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn stationary_nonlinear_flow() {
        let (rule, basis) = setup(2.0);
        let p = exponent(3.0, 2.0);
        let f0 = NodalFn::constant(&rule, 2.0);
        let grid = uniform_grid(0.2, 3);
        let trace = run_nonlinear_flow(&basis, &f0, &p, &grid, 1e-3).unwrap();
        for i in 0..grid.len() {
            assert_abs_diff_eq!(trace.entropy[i], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(trace.fisher[i], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linearized_decay_rates() {
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let t_max = default_t_max(p.d());
        let grid = uniform_grid(t_max, 41);
        // first eigenmode: I decays at 2 lambda_1 = 2d
        let c1 = basis.mode(1).unwrap();
        let f0 = NodalFn::new(&rule, c1.values().iter().map(|v| 1.0 + 1e-3 * v).collect()).unwrap();
        let trace = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
        let slope = decay_rate(&trace, Observable::Fisher, (t_max / 2.0, t_max)).unwrap();
        assert_abs_diff_eq!(slope, -6.0, epsilon = 0.06);
        // second eigenmode: 2 lambda_2 = 4 (d+1)
        let c2 = basis.mode(2).unwrap();
        let f0 = NodalFn::new(&rule, c2.values().iter().map(|v| 1.0 + 1e-3 * v).collect()).unwrap();
        let trace = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
        let slope = decay_rate(&trace, Observable::Fisher, (t_max / 2.0, t_max)).unwrap();
        assert_abs_diff_eq!(slope, -16.0, epsilon = 0.16);
    }

    #[test]
    fn decay_rate_needs_samples() {
        let trace = FlowTrace {
            p: 4.0,
            d: 3.0,
            times: alloc::vec![0.0, 1.0],
            entropy: alloc::vec![1.0, 0.1],
            fisher: alloc::vec![1.0, 0.1],
            mass: alloc::vec![1.0, 1.0],
            min_g: alloc::vec![1.0, 1.0],
        };
        assert!(decay_rate(&trace, Observable::Entropy, (2.0, 3.0)).is_err());
    }

    #[test]
    fn improved_decay_on_even_data() {
        let (rule, basis) = setup(3.0);
        let p = exponent(2.0, 3.0);
        let m2 = rule.integrate_fn(|x| x * x);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 1e-3 * (x * x - m2));
        let report = improved_decay_check(&basis, &f0, &p).unwrap();
        // slope ~ -2 lambda_2 = -16, bound = -2 (3 + 11/15 * 5) = -40/3
        assert_abs_diff_eq!(report.fisher_slope, -16.0, epsilon = 0.16);
        assert_abs_diff_eq!(report.improved_bound, -40.0 / 3.0, epsilon = 1e-12);
        assert!(report.fisher_slope <= report.improved_bound + 0.05);
        assert!(report.max_mean_derivative < 1e-12);
        assert!(report.max_first_moment < 1e-12);
        assert!(report.min_poincare_margin > 0.0);
    }

    #[test]
    fn log_sobolev_decay_at_p_two() {
        // the p = 2 flow drives the log entropy down at rate 2d on
        // near-first-mode data
        let (rule, basis) = setup(3.0);
        let p = exponent(2.0, 3.0);
        let c1 = basis.mode(1).unwrap();
        let f0 = NodalFn::new(&rule, c1.values().iter().map(|v| 1.0 + 1e-3 * v).collect()).unwrap();
        let t_max = default_t_max(p.d());
        let grid = uniform_grid(t_max, 41);
        let trace = run_heat_flow(&basis, &f0, &p, &grid).unwrap();
        let slope = decay_rate(&trace, Observable::Entropy, (t_max / 2.0, t_max)).unwrap();
        assert_abs_diff_eq!(slope, -6.0, epsilon = 0.12);
    }

    #[test]
    fn fisher_form_stays_nonnegative_along_flows() {
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.2 * x - 0.1 * x * x);
        let g0 = f0.map(|v| libm::pow(v, 4.0));
        let ghat = basis.to_spectral(&g0).unwrap();
        for &t in &uniform_grid(default_t_max(p.d()), 11) {
            let g = basis.to_nodal(&ghat.heat(t).unwrap()).unwrap();
            let f = g.map(|v| libm::pow(v, 0.25));
            let form = crate::functionals::fisher_form(&basis, &f, &p).unwrap();
            assert!(form >= -1e-9, "t={t}: Fisher form {form}");
        }
    }

    #[test]
    fn flow_endpoint_solves_euler_lagrange() {
        // at large times the flow has collapsed onto constants, which
        // solve the Euler-Lagrange equation
        let (rule, basis) = setup(3.0);
        let p = exponent(4.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.1 * x);
        let g0 = f0.map(|v| libm::pow(v, 4.0));
        let ghat = basis.to_spectral(&g0).unwrap();
        let g = basis.to_nodal(&ghat.heat(4.0).unwrap()).unwrap();
        let f = g.map(|v| libm::pow(v, 0.25));
        let residual = crate::functionals::el_residual(&basis, &f, &p).unwrap();
        let sup = residual
            .values()
            .iter()
            .fold(0.0f64, |m, &v| m.max(libm::fabs(v)));
        assert!(sup < 1e-6, "endpoint residual {sup}");
    }

    #[test]
    fn improved_decay_rejects_odd_data() {
        let (rule, basis) = setup(3.0);
        let p = exponent(2.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 1e-3 * x);
        assert!(matches!(
            improved_decay_check(&basis, &f0, &p),
            Err(Error::Symmetry(_))
        ));
    }

    #[test]
    fn poincare_margin_on_pure_quadratic() {
        // f = x^2: the margin is 4/(d+3) by the moment formulas
        let (rule, basis) = setup(3.0);
        let p = exponent(2.0, 3.0);
        let f0 = NodalFn::from_fn(&rule, |x| 1.0 + 0.05 * x * x);
        let report = improved_decay_check(&basis, &f0, &p).unwrap();
        assert!(report.min_poincare_margin > 0.0);
    }

    #[test]
    fn hyper_report_basics() {
        let (rule, basis) = setup(3.0);
        assert!(hypercontractivity_run(&basis, &NodalFn::constant(&rule, 1.0), 2.5).is_err());

        let u = NodalFn::constant(&rule, 1.0);
        let r = hypercontractivity_run(&basis, &u, 1.5).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.rhs_p, 1.0, epsilon = 1e-14);
        assert!(r.spectral_identity_error < 1e-12);

        // single mode: lhs^2 = 1 + eps^2 (p-1) exactly
        let eps = 0.05;
        let p = 1.7;
        let c1 = basis.mode(1).unwrap();
        let u = NodalFn::new(&rule, c1.values().iter().map(|v| 1.0 + eps * v).collect()).unwrap();
        let r = hypercontractivity_run(&basis, &u, p).unwrap();
        assert_abs_diff_eq!(r.lhs * r.lhs, 1.0 + eps * eps * (p - 1.0), epsilon = 1e-13);
        assert!(r.lhs <= r.rhs_p + 1e-12);
        assert!(r.spectral_identity_error < 1e-10);
    }

    #[test]
    fn beckner_chain_on_perturbations() {
        let (rule, basis) = setup(2.0);
        let p = 1.4;
        let u = NodalFn::from_fn(&rule, |x| 1.0 + 0.01 * x);
        let r = beckner_chain_check(&basis, &u, p).unwrap();
        assert!(r.holds(1e-10));
        // scaling u -> 2u multiplies every quantity by 4
        let r2 = beckner_chain_check(&basis, &u.map(|v| 2.0 * v), p).unwrap();
        assert_abs_diff_eq!(r2.interpolation, 4.0 * r.interpolation, epsilon = 1e-10);
        assert_abs_diff_eq!(r2.semigroup, 4.0 * r.semigroup, epsilon = 1e-10);
        assert_abs_diff_eq!(r2.dirichlet, 4.0 * r.dirichlet, epsilon = 1e-10);
        assert!(r2.holds(1e-10));

        // a high mode leaves a visible gap in the middle link
        let c5 = basis.mode(5).unwrap();
        let u5 = NodalFn::new(&rule, c5.values().iter().map(|v| 1.0 + 0.01 * v).collect()).unwrap();
        let r5 = beckner_chain_check(&basis, &u5, p).unwrap();
        assert!(r5.holds(1e-10));
        assert!(r5.semigroup < r5.dirichlet * 0.9);
    }

    #[test]
    fn gross_monotonicity() {
        let (rule, basis) = setup(2.0);
        let u = NodalFn::from_fn(&rule, |x| 1.0 + 0.2 * x);
        let grid = uniform_grid(1.0, 33);
        let r = gross_monotonicity_check(&basis, &u, 1.5, &grid).unwrap();
        assert_abs_diff_eq!(r.p_end, 2.0, epsilon = 1e-12);
        assert!(r.max_step_increase <= 1e-10);
        assert!(r.max_bracket <= 1e-10);
        assert!(*r.norm_values.last().unwrap() <= r.norm_values[0]);

        let c = NodalFn::constant(&rule, 1.0);
        let rc = gross_monotonicity_check(&basis, &c, 1.5, &grid).unwrap();
        assert!(libm::fabs(rc.norm_values[0] - rc.norm_values.last().unwrap()) < 1e-13);
    }
}
