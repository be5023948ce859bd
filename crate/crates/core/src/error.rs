use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// The functional is undefined on (numerically) constant input.
    #[error("input function is constant up to numerical precision")]
    ConstantInput,

    /// An operation that requires a strictly positive function received one
    /// that touches or crosses zero.
    #[error("function must be strictly positive ({0})")]
    Positivity(&'static str),

    /// Requested basis degree exceeds what the quadrature rule resolves.
    #[error("basis degree {kmax} exceeds aliasing limit n/2 = {limit}")]
    DegreeOverflow { kmax: usize, limit: usize },

    /// Two objects built on different rules or dimensions were combined.
    #[error("mismatched quadrature rule or dimension ({0})")]
    Mismatch(&'static str),

    /// The initial datum of a symmetry-restricted flow is not even.
    #[error("initial datum is not even: odd part {0:.3e} exceeds 1e-12")]
    Symmetry(f64),

    /// The nonlinear integrator lost positivity or spectral resolution.
    #[error("time step too large: {0}")]
    StepSize(&'static str),

    /// A fit window contains fewer than two usable samples.
    #[error("window contains fewer than two usable samples")]
    EmptyWindow,

    /// The tridiagonal eigensolver failed to converge.
    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,
}
