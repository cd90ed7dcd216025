//! Discrete heat kernels on the square lattice `eps Z^2`, their large-time
//! asymptotic expansions, and a harness that measures every remainder bound.
//!
//! * [`specfun`]: Bessel functions, `E_1`, Gaussian derivatives.
//! * [`quad`]: periodic, polar and oscillatory-tail quadrature.
//! * [`kernel`]: the exact kernels `u` and `v` by two independent routes.
//! * [`expansion`]: truncated asymptotic sums and their residuals.
//! * [`omega`]: the lattice-artifact term `Omega(x)`.
//! * [`constants`]: the constant `S_0` of the logarithmic law at the origin.
//! * [`verify`]: decay fits, summation checks and the bound dashboard.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod expansion;
pub mod kernel;
pub mod omega;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use quad::{PolarDomain, QuadResult, QuadratureSpec, RadiusProfile, Refinement, Rule};
