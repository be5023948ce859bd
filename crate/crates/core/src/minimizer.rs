//! Direct variational verification that the sharp constant equals `d`.
//!
//! The quotient is minimized by projected gradient descent over nodal
//! values with the norm constraint `||f||_p = 1`. Two structural facts
//! shape the implementation:
//!
//! * The infimum is approached, never attained: minimizing sequences
//!   collapse onto constants, where the quotient degenerates into the
//!   Rayleigh quotient of the perturbation. The iterate is therefore kept
//!   in the scale-invariant form `f = m (1 + u)` and the search works on
//!   the perturbation `u` directly; `m` cancels from the quotient, and
//!   storing `u` (instead of recovering it from `f`) preserves full
//!   relative precision at arbitrarily small amplitudes, which is what
//!   makes the gradient tolerance of `1e-6` measurable at all.
//! * The objective must see every nodal degree of freedom, so the
//!   Dirichlet form is taken at full degree `n - 1` (see [`Basis::full`]);
//!   a truncated projection leaves aliased directions invisible to the
//!   numerator and descent escapes through them.
//!
//! Steps combine a Sobolev-preconditioned shape move (scaled by the
//! squared amplitude, matching the `1/amp^2` transverse curvature), an
//! explicit radial rescale of the perturbation, and, once the iterate is
//! nearly constant, a geometric contraction whose quotient values trace
//! the collapse.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::functionals::Exponent;
use crate::measure::{NodalFn, QuadratureRule};
use crate::rng::SplitMix64;
use crate::spectral::{Basis, SpectralFn};
use crate::{functionals, Error, Result};

const MAX_ITER: usize = 4000;
const LINE_SEARCH_HALVINGS: usize = 25;
const STAG_WINDOW: usize = 50;
const STAG_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-6;
/// Amplitude below which the iterate counts as "approaching constants"
/// and the collapse is driven by explicit contraction.
const DEFLATE_AMP: f64 = 1e-3;
/// Amplitude at which the collapse stops.
const AMP_FLOOR: f64 = 1e-9;
const CONTRACT: f64 = 0.7;
/// Amplitude of the random starts.
const START_AMP: f64 = 0.3;
const START_MODES: usize = 6;

/// Result of a multi-start minimization.
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub p: f64,
    pub d: f64,
    /// Minimum over all starts of the final quotient.
    pub best_value: f64,
    /// Iterate realizing `best_value`, normalized to `||f||_p = 1`.
    pub argmin: NodalFn,
    pub starts: usize,
    /// Whether the best start reached the gradient tolerance before the
    /// iteration cap.
    pub converged: bool,
    /// Norm of the gradient projected on the `||f||_p = 1` manifold at the
    /// final iterate.
    pub gradient_norm: f64,
}

enum Target {
    /// `Q_p`, with constraint `||f||_p = 1`.
    Quotient(f64),
    /// Log-Sobolev ratio, with constraint `||f||_2 = 1`.
    LogSob,
}

/// Scalar reductions of the perturbation used by both targets.
struct Moments {
    /// `int u dnu`; kept near zero by exact recentring.
    lin: f64,
    /// `int u^2 dnu`.
    i2: f64,
    /// `int [(1+u)^q - 1 - q u] dnu` for the target exponent `q`.
    psi: f64,
}

struct Search<'a> {
    basis: &'a Basis,
    target: Target,
}

struct Episode {
    value: f64,
    perturbation: Vec<f64>,
    gradient_norm: f64,
    converged: bool,
}

impl<'a> Search<'a> {
    fn d(&self) -> f64 {
        self.basis.d().get()
    }

    fn weights(&self) -> &[f64] {
        self.basis.rule().weights()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(self.weights())
            .map(|((&x, &y), &w)| w * x * y)
            .sum()
    }

    fn nodal(&self, values: Vec<f64>) -> NodalFn {
        NodalFn::new(self.basis.rule(), values).expect("values built on the search rule")
    }

    fn moments(&self, u: &[f64], q: f64) -> Moments {
        let (mut lin, mut i2, mut psi) = (0.0, 0.0, 0.0);
        for (&v, &w) in u.iter().zip(self.weights()) {
            lin += w * v;
            i2 += w * v * v;
            psi += w * if v > -1.0 {
                libm::expm1(q * libm::log1p(v)) - q * v
            } else {
                libm::pow(libm::fabs(1.0 + v), q) - 1.0 - q * v
            };
        }
        Moments { lin, i2, psi }
    }

    /// `||1+u||_p^2 - ||1+u||_2^2`, stable at any amplitude.
    fn gap_rel(&self, p: f64, m: &Moments) -> f64 {
        let cap = m.psi + p * m.lin;
        libm::expm1(2.0 / p * libm::log1p(cap)) - m.i2 - 2.0 * m.lin
    }

    /// Dirichlet energy and spectral projection of the perturbation.
    fn stiffness(&self, u: &[f64]) -> Option<(f64, SpectralFn)> {
        let hat = self.basis.to_spectral(&self.nodal(u.to_vec())).ok()?;
        Some((hat.dirichlet(), hat))
    }

    /// Entropy denominator of the log-Sobolev ratio for `f = 1 + u`,
    /// requiring `1 + u > 0`.
    fn entropy_rel(&self, u: &[f64], m: &Moments) -> Option<f64> {
        let mut core_sum = 0.0;
        for (&v, &w) in u.iter().zip(self.weights()) {
            if v <= -1.0 {
                return None;
            }
            let s = 1.0 + v;
            core_sum += w * (s * s * libm::log1p(v) - v);
        }
        let i2c = m.i2 + 2.0 * m.lin;
        Some(2.0 * (core_sum + m.lin) - (1.0 + i2c) * libm::log1p(i2c))
    }

    fn value(&self, u: &[f64]) -> Option<f64> {
        let (dir, _) = self.stiffness(u)?;
        match self.target {
            Target::Quotient(p) => {
                let m = self.moments(u, p);
                let gap = self.gap_rel(p, &m);
                (gap != 0.0).then(|| (p - 2.0) / self.d() * dir / gap)
            }
            Target::LogSob => {
                let m = self.moments(u, 2.0);
                let entropy = self.entropy_rel(u, &m)?;
                (entropy != 0.0).then(|| 2.0 / self.d() * dir / entropy)
            }
        }
    }

    /// Gradient of the target at `f = 1 + u` in `L^2(nu_d)`, projected on
    /// the tangent space of the norm constraint; returns its norm on the
    /// normalized manifold, the preconditioned descent direction, and the
    /// magnitude of the radial component (along the perturbation itself),
    /// which measures how much further the collapse can lower the norm.
    fn gradient(&self, u: &[f64]) -> Option<(f64, Vec<f64>, f64)> {
        let (dir_energy, hat) = self.stiffness(u)?;

        let (raw, eta, manifold_scale): (Vec<f64>, Vec<f64>, f64) = match self.target {
            Target::Quotient(p) => {
                let m = self.moments(u, p);
                let gap = self.gap_rel(p, &m);
                if gap == 0.0 {
                    return None;
                }
                let q = (p - 2.0) / self.d() * dir_energy / gap;
                let cap = m.psi + p * m.lin;
                let log_norm_p = libm::log1p(cap) / p;
                // Mode-wise assembly: the part of the gradient linear in u
                // cancels between the Dirichlet and norm terms, and forming
                // that cancellation as the scalar (lambda_k/d - Q) per mode
                // keeps it exact where a nodal subtraction would lose all
                // significant digits along the collapse.
                let linear: Vec<f64> = hat
                    .coeffs()
                    .iter()
                    .zip(self.basis.eigenvalues())
                    .map(|(&a, &l)| 2.0 * (p - 2.0) / gap * a * (l / self.d() - q))
                    .collect();
                let linear = self
                    .basis
                    .to_nodal(&SpectralFn::new(self.basis.d(), linear))
                    .ok()?;
                // remainder tau/(p-2) - u = O(u^2)
                let g = linear
                    .values()
                    .iter()
                    .zip(u)
                    .map(|(&lin_part, &v)| {
                        let tau_over = if v > -1.0 {
                            (1.0 + v) * libm::expm1((p - 2.0) * (libm::log1p(v) - log_norm_p))
                                / (p - 2.0)
                        } else {
                            let fv = 1.0 + v;
                            (libm::exp((2.0 - p) * log_norm_p)
                                * libm::pow(libm::fabs(fv), p - 1.0)
                                * fv.signum()
                                - fv)
                                / (p - 2.0)
                        };
                        lin_part - 2.0 * q * (p - 2.0) / gap * (tau_over - v)
                    })
                    .collect();
                let eta = u
                    .iter()
                    .map(|&v| {
                        let fv = 1.0 + v;
                        libm::pow(libm::fabs(fv), p - 1.0) * fv.signum()
                    })
                    .collect();
                (g, eta, libm::exp(log_norm_p))
            }
            Target::LogSob => {
                let m = self.moments(u, 2.0);
                let entropy = self.entropy_rel(u, &m)?;
                if entropy == 0.0 {
                    return None;
                }
                let r = 2.0 / self.d() * dir_energy / entropy;
                let i2c = m.i2 + 2.0 * m.lin;
                let l2 = libm::log1p(i2c);
                // same mode-wise cancellation of the linear part
                let linear: Vec<f64> = hat
                    .coeffs()
                    .iter()
                    .zip(self.basis.eigenvalues())
                    .map(|(&a, &l)| 4.0 / entropy * a * (l / self.d() - r))
                    .collect();
                let linear = self
                    .basis
                    .to_nodal(&SpectralFn::new(self.basis.d(), linear))
                    .ok()?;
                // remainder gE - 4u = O(u^2)
                let g = linear
                    .values()
                    .iter()
                    .zip(u)
                    .map(|(&lin_part, &v)| {
                        let rem = 2.0 * (1.0 + v) * (2.0 * libm::log1p(v) - l2) - 4.0 * v;
                        lin_part - r / entropy * rem
                    })
                    .collect();
                let eta = u.iter().map(|&v| 1.0 + v).collect();
                (g, eta, libm::sqrt(1.0 + i2c))
            }
        };

        let ee = self.dot(&eta, &eta);
        let project = |v: &[f64]| -> Vec<f64> {
            let ve = self.dot(v, &eta);
            v.iter().zip(&eta).map(|(&x, &e)| x - ve / ee * e).collect()
        };
        let tangential = project(&raw);
        // The gradient at the normalized iterate f/||f|| rescales by the
        // norm (zero-homogeneity of the target).
        let gnorm = manifold_scale * libm::sqrt(self.dot(&tangential, &tangential));
        let uu = self.dot(u, u);
        let radial = if uu > 0.0 {
            manifold_scale * libm::fabs(self.dot(&tangential, u)) / libm::sqrt(uu)
        } else {
            0.0
        };

        // Sobolev-preconditioned descent direction: the full-degree
        // stiffness makes plain gradient flow stiff, and scaling spectral
        // components by 1/(1 + lambda_k) restores O(1) conditioning while
        // staying a descent direction.
        let that = self
            .basis
            .to_spectral(&self.nodal(tangential.clone()))
            .ok()?;
        let smoothed: Vec<f64> = that
            .coeffs()
            .iter()
            .zip(self.basis.eigenvalues())
            .map(|(&a, &l)| a / (1.0 + l))
            .collect();
        let smoothed = self
            .basis
            .to_nodal(&SpectralFn::new(self.basis.d(), smoothed))
            .ok()?;
        let direction = project(smoothed.values());
        Some((gnorm, direction, radial))
    }

    /// Exact recentring: `1 + u = (1 + ubar)(1 + u')` with `int u' = 0`.
    fn recentre(&self, u: &mut [f64]) {
        let ubar = self.dot(u, &alloc::vec![1.0; u.len()]);
        for v in u.iter_mut() {
            *v = (*v - ubar) / (1.0 + ubar);
        }
    }

    /// Contraction step of the collapse. The minimizing family drifts away
    /// from the first eigenmode quadratically in the amplitude, so the
    /// drift components must contract with the square of the factor applied
    /// to the dominant mode; a uniform rescale would displace the iterate
    /// from the optimal collapse path and re-inject transverse gradient.
    fn contract(&self, u: &[f64]) -> Option<Vec<f64>> {
        let hat = self.basis.to_spectral(&self.nodal(u.to_vec())).ok()?;
        // Rounding leaves absolute debris of about 1e-17 in modes the
        // iterate does not genuinely carry; left alone it turns into an
        // O(1/amp^2) phantom transverse gradient along the collapse, so
        // anything far below the dominant coefficient is flushed.
        let floor = 1e-13 * libm::fabs(hat.coeffs().get(1).copied().unwrap_or(0.0));
        let coeffs: Vec<f64> = hat
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                if libm::fabs(a) < floor {
                    0.0
                } else if k == 1 {
                    CONTRACT * a
                } else {
                    CONTRACT * CONTRACT * a
                }
            })
            .collect();
        let mut contracted = self
            .basis
            .to_nodal(&SpectralFn::new(self.basis.d(), coeffs))
            .ok()?
            .values()
            .to_vec();
        self.recentre(&mut contracted);
        Some(contracted)
    }

    fn amplitude(&self, u: &[f64]) -> f64 {
        libm::sqrt(self.dot(u, u))
    }

    fn random_start(&self, rng: &mut SplitMix64) -> Vec<f64> {
        let n = self.basis.rule().len();
        let mut w = alloc::vec![0.0; n];
        for k in 1..=START_MODES.min(self.basis.kmax()) {
            let gamma = rng.next_normal();
            let mode = self.basis.mode(k).expect("k <= kmax");
            for (acc, &v) in w.iter_mut().zip(mode.values()) {
                *acc += gamma * v;
            }
        }
        let norm = libm::sqrt(self.dot(&w, &w));
        let mut u: Vec<f64> = if norm == 0.0 {
            let mode = self.basis.mode(1).expect("kmax >= 1");
            mode.values().iter().map(|&v| START_AMP * v).collect()
        } else {
            w.iter().map(|&v| START_AMP * v / norm).collect()
        };
        // clip to positivity of 1 + u
        for v in u.iter_mut() {
            if *v < -0.95 {
                *v = -0.95;
            }
        }
        self.recentre(&mut u);
        u
    }

    fn run_episode(&self, rng: &mut SplitMix64) -> Option<Episode> {
        let mut u = self.random_start(rng);
        let mut q = self.value(&u)?;
        let mut stagnant = 0usize;
        let mut last_gnorm = f64::INFINITY;
        // best gradient norm since the last contraction; a contraction is
        // only taken once shape relaxation stops improving on it
        let mut gnorm_mark = f64::INFINITY;

        let mut stalled = 0usize;
        // contractions that failed to improve the gradient since the one
        // before; guards against the collapse outracing shape relaxation
        let mut raced = 0usize;
        let mut gnorm_at_contract = f64::INFINITY;

        for _ in 0..MAX_ITER {
            let (gnorm, direction, radial) = self.gradient(&u)?;
            last_gnorm = gnorm;
            let amp = self.amplitude(&u);
            if gnorm < GRAD_TOL || amp < AMP_FLOOR {
                return Some(Episode {
                    value: q,
                    perturbation: u,
                    gradient_norm: gnorm,
                    converged: gnorm < GRAD_TOL,
                });
            }
            let deflating = amp < DEFLATE_AMP;
            // once the radial component is safely below tolerance the
            // amplitude is small enough; only the shape still needs work
            let settled = deflating && radial < 0.3 * GRAD_TOL;
            let mut improvement = 0.0;
            let mut accepted = false;

            // Shape step: backtracking along the preconditioned gradient,
            // scaled by amp^2 to match the transverse curvature growth
            // along the collapse. Away from constants steps are accepted
            // by quotient decrease; during the collapse genuine quotient
            // improvements sink below evaluation noise while the gradient
            // stays sharply measurable, so acceptance switches to gradient
            // decrease.
            let mut step = 1.0;
            for _ in 0..LINE_SEARCH_HALVINGS {
                let mut trial: Vec<f64> = u
                    .iter()
                    .zip(&direction)
                    .map(|(&v, &g)| v - step * amp * amp * g)
                    .collect();
                self.recentre(&mut trial);
                if deflating {
                    if let Some((gn_t, _, _)) = self.gradient(&trial) {
                        if gn_t < gnorm * (1.0 - 1e-3) {
                            if let Some(qt) = self.value(&trial) {
                                u = trial;
                                q = qt;
                                accepted = true;
                                break;
                            }
                        }
                    }
                } else if let Some(qt) = self.value(&trial) {
                    if qt < q {
                        improvement += q - qt;
                        u = trial;
                        q = qt;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if settled {
                // pure shape relaxation at the final amplitude; give up
                // when it stops moving
                if accepted {
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= 30 {
                        return Some(Episode {
                            value: q,
                            perturbation: u,
                            gradient_norm: gnorm,
                            converged: false,
                        });
                    }
                }
            } else if deflating {
                // Near constants the collapse is the contraction itself and
                // the recorded value tracks the quotient along it. Each
                // contraction displaces the amplitude-dependent optimal
                // shape and bumps the transverse gradient, so contract only
                // once shape relaxation has stopped making headway.
                if gnorm < 0.99 * gnorm_mark {
                    gnorm_mark = gnorm;
                } else {
                    if gnorm < 0.95 * gnorm_at_contract {
                        raced = 0;
                    } else {
                        raced += 1;
                        if raced >= 12 {
                            // the collapse is outracing shape relaxation;
                            // stop instead of grinding into the noise floor
                            return Some(Episode {
                                value: q,
                                perturbation: u,
                                gradient_norm: gnorm,
                                converged: false,
                            });
                        }
                    }
                    gnorm_at_contract = gnorm;
                    u = self.contract(&u)?;
                    q = self.value(&u)?;
                    gnorm_mark = f64::INFINITY;
                }
                stagnant = 0;
            } else {
                // Radial step: rescaling the perturbation is the direction
                // the shape step resolves poorly; try an explicit
                // contraction and expansion.
                let mut radial_best: Option<(f64, Vec<f64>)> = None;
                for &theta in &[CONTRACT, 1.0 / CONTRACT] {
                    let trial: Vec<f64> = u.iter().map(|&v| theta * v).collect();
                    if let Some(qt) = self.value(&trial) {
                        if qt < q && radial_best.as_ref().is_none_or(|(b, _)| qt < *b) {
                            radial_best = Some((qt, trial));
                        }
                    }
                }
                if let Some((qt, trial)) = radial_best {
                    improvement += q - qt;
                    u = trial;
                    q = qt;
                }

                if improvement >= STAG_TOL {
                    stagnant = 0;
                } else {
                    stagnant += 1;
                    if stagnant >= STAG_WINDOW {
                        return Some(Episode {
                            value: q,
                            perturbation: u,
                            gradient_norm: last_gnorm,
                            converged: false,
                        });
                    }
                }
            }
        }
        Some(Episode {
            value: q,
            perturbation: u,
            gradient_norm: last_gnorm,
            converged: false,
        })
    }

    fn run(&self, starts: usize, seed: u64, p_label: f64) -> Result<MinimizeResult> {
        if starts == 0 {
            return Err(Error::Domain("at least one start is required"));
        }
        let root = SplitMix64::new(seed);
        let mut best: Option<Episode> = None;
        for s in 0..starts {
            let mut rng = root.fork(s as u64);
            let Some(episode) = self.run_episode(&mut rng) else {
                continue;
            };
            // Converged episodes are preferred: values agree to evaluation
            // noise near the infimum, and the converged iterate is the
            // meaningful report. An unconverged episode only wins if its
            // value is smaller by more than the noise scale, which would
            // point at a genuine violation worth surfacing.
            let better = match &best {
                None => true,
                Some(b) => match (episode.converged, b.converged) {
                    (true, false) => episode.value < b.value + 1e-6,
                    (false, true) => episode.value < b.value - 1e-6,
                    _ => episode.value < b.value,
                },
            };
            if better {
                best = Some(episode);
            }
        }
        let best = best.ok_or(Error::Domain("no start produced a usable iterate"))?;

        // report the argmin on the ||f||_p = 1 manifold
        let constraint = match self.target {
            Target::Quotient(p) => p,
            Target::LogSob => 2.0,
        };
        let mut values: Vec<f64> = best.perturbation.iter().map(|&v| 1.0 + v).collect();
        let norm = self
            .nodal(values.clone())
            .norm(constraint)
            .expect("constraint exponent is >= 1");
        for v in values.iter_mut() {
            *v /= norm;
        }
        Ok(MinimizeResult {
            p: p_label,
            d: self.d(),
            best_value: best.value,
            argmin: self.nodal(values),
            starts,
            converged: best.converged,
            gradient_norm: best.gradient_norm,
        })
    }
}

/// Minimizes `Q_p` over non-constant functions by projected gradient
/// descent from `starts` random low-mode perturbations of the constant.
/// Deterministic for a fixed seed.
pub fn minimize_quotient(
    rule: &Arc<QuadratureRule>,
    p: &Exponent,
    starts: usize,
    seed: u64,
) -> Result<MinimizeResult> {
    if rule.d() != p.d() {
        return Err(Error::Mismatch("exponent and rule dimensions differ"));
    }
    if p.p() == 2.0 {
        return Err(Error::Domain("p = 2 is handled by minimize_logsob"));
    }
    let basis = Basis::full(rule)?;
    let search = Search {
        basis: &basis,
        target: Target::Quotient(p.p()),
    };
    search.run(starts, seed, p.p())
}

/// Same scheme for the log-Sobolev ratio (the `p = 2` endpoint).
pub fn minimize_logsob(
    rule: &Arc<QuadratureRule>,
    starts: usize,
    seed: u64,
) -> Result<MinimizeResult> {
    let basis = Basis::full(rule)?;
    let search = Search {
        basis: &basis,
        target: Target::LogSob,
    };
    search.run(starts, seed, 2.0)
}

/// Quotient along the explicit minimizing family `1 + eps x`: rows
/// `(eps, Q_p[1 + eps x])`. The values decrease to 1 as `eps` shrinks;
/// at `p = 1` the family gives exactly 1 for every admissible `eps`.
pub fn perturbation_sharpness(
    basis: &Basis,
    p: &Exponent,
    eps_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if eps_list.is_empty() {
        return Err(Error::Domain("need at least one eps value"));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e <= 0.5)) {
        return Err(Error::Domain("eps values must lie in (0, 0.5]"));
    }
    let rule = basis.rule();
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let f = NodalFn::from_fn(rule, |x| 1.0 + eps * x);
        let q = functionals::quotient_qp(basis, &f, p)?;
        rows.push((eps, q));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Dim, QuadratureRule};
    use approx::assert_abs_diff_eq;

    fn setup(d: f64) -> Arc<QuadratureRule> {
        QuadratureRule::new(Dim::new(d).unwrap(), 64).unwrap()
    }

    fn exponent(p: f64, d: f64) -> Exponent {
        Exponent::new(p, Dim::new(d).unwrap()).unwrap()
    }

    #[test]
    fn quotient_minimum_is_one_at_d3_p4() {
        let rule = setup(3.0);
        let r = minimize_quotient(&rule, &exponent(4.0, 3.0), 3, 7).unwrap();
        assert!(r.best_value >= 0.999, "best {}", r.best_value);
        assert!(r.best_value <= 1.05, "best {}", r.best_value);
        assert!(r.converged);
        assert!(r.gradient_norm < 1e-6);
        assert_abs_diff_eq!(r.argmin.norm(4.0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn determinism_to_the_last_bit() {
        let rule = setup(3.0);
        let p = exponent(4.0, 3.0);
        let a = minimize_quotient(&rule, &p, 2, 123).unwrap();
        let b = minimize_quotient(&rule, &p, 2, 123).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.gradient_norm.to_bits(), b.gradient_norm.to_bits());
        let c = minimize_quotient(&rule, &p, 2, 124).unwrap();
        assert_ne!(a.best_value.to_bits(), c.best_value.to_bits());
    }

    #[test]
    fn logsob_minimum_is_one() {
        for &d in &[1.0, 3.0] {
            let rule = setup(d);
            let r = minimize_logsob(&rule, 3, 11).unwrap();
            assert!(r.best_value >= 0.999, "d={d}: {}", r.best_value);
            assert!(r.best_value <= 1.05, "d={d}: {}", r.best_value);
            assert!(r.converged, "d={d}");
            assert!(r.gradient_norm < 1e-6, "d={d}: {}", r.gradient_norm);
        }
    }

    #[test]
    fn rejects_p_two_and_zero_starts() {
        let rule = setup(3.0);
        assert!(minimize_quotient(&rule, &exponent(2.0, 3.0), 2, 1).is_err());
        assert!(minimize_quotient(&rule, &exponent(4.0, 3.0), 0, 1).is_err());
    }

    #[test]
    fn sharpness_family_decreases_to_one() {
        let basis = Basis::new(&setup(3.0), 20).unwrap();
        let p = exponent(4.0, 3.0);
        let eps = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
        let rows = perturbation_sharpness(&basis, &p, &eps).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].1 < w[0].1, "values must decrease with eps");
        }
        for (_, q) in &rows {
            assert!(*q > 1.0);
        }
        // Richardson extrapolation in eps^2 lands on 1
        let (e1, q1) = rows[rows.len() - 2];
        let (e2, q2) = rows[rows.len() - 1];
        let limit = q2 - e2 * e2 * (q1 - q2) / (e1 * e1 - e2 * e2);
        assert_abs_diff_eq!(limit, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn sharpness_family_is_flat_at_p_one() {
        let basis = Basis::new(&setup(3.0), 20).unwrap();
        let p = exponent(1.0, 3.0);
        let rows = perturbation_sharpness(&basis, &p, &[0.3, 0.1, 0.01]).unwrap();
        for (_, q) in rows {
            assert_abs_diff_eq!(q, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sharpness_rejects_bad_eps() {
        let basis = Basis::new(&setup(3.0), 20).unwrap();
        let p = exponent(4.0, 3.0);
        assert!(perturbation_sharpness(&basis, &p, &[]).is_err());
        assert!(perturbation_sharpness(&basis, &p, &[0.7]).is_err());
        assert!(perturbation_sharpness(&basis, &p, &[0.0]).is_err());
    }
}
