//! Numerical toolkit for the sharp interpolation inequalities of the
//! ultraspherical operator `L f = (1 - x^2) f'' - d x f'` on (-1, 1).
//!
//! The crate provides, for any real dimension parameter `d >= 1`:
//!
//! * the invariant probability measure of `L` together with Gauss quadrature
//!   and `L^p` norms against it ([`measure`]),
//! * the orthonormal Gegenbauer eigenbasis, spectral transforms,
//!   differentiation and the exact heat semigroup ([`spectral`]),
//! * the interpolation quotient, log-Sobolev ratio, exponential-class
//!   deficit, entropy and Fisher information ([`functionals`]),
//! * the algebraic certificates behind the sharp constant: critical
//!   exponents, the discriminant of the pointwise quadratic form, and its
//!   sum-of-squares decomposition ([`certificates`]),
//! * entropy/Fisher decay along the heat flow, the equivalent nonlinear
//!   flow, and hypercontractivity experiments ([`flows`]),
//! * direct variational minimization of the quotient, which confirms that
//!   the sharp constant equals `d` ([`minimizer`]).
//!
//! The crate is `no_std` (with `alloc`); everything that touches files,
//! formats or the command line lives in the companion `ultrasphere-cli`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod certificates;
mod error;
pub mod flows;
pub mod functionals;
pub mod measure;
pub mod minimizer;
pub mod rng;
pub mod spectral;

pub use error::Error;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = core::result::Result<T, Error>;
