//! The constant `S_0` in `v(0, t) = (1/4 pi) ln(t/eps^2) + S_0 + O(eps^2/t)`.
//!
//! ```text
//! S_0 = (pi gamma + int_{R_pi} (1/A - 1/|theta|^2) dtheta + int_0^{2 pi} ln r_pi(phi) dphi) / (2 pi)^2
//! ```
//!
//! The Gaussian route replaces `pi gamma` by
//! `int_{B_1} (1 - e^{-|xi|^2})/|xi|^2 dxi - int_{R^2 \ B_1} e^{-|xi|^2}/|xi|^2 dxi`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::Result;
use crate::omega::d0;
use crate::quad::{self, square_radius, GaussLegendre, PolarDomain, QuadratureSpec, Rule};
use crate::specfun::expint::euler_gamma;

const TOL: f64 = 1e-13;

/// Distance from the origin to the boundary of `[-pi, pi]^2` in direction `phi`.
pub fn r_pi(phi: f64) -> f64 {
    square_radius(PI, phi)
}

/// `int_0^{2 pi} ln r_pi(phi) dphi` by Gauss-Legendre on the four smooth
/// pieces between the corners.
pub fn boundary_part() -> Result<f64> {
    let spec = QuadratureSpec::doubling(Rule::GaussLegendre1d, 16, TOL);
    let res = quad::refine(&spec, |n| {
        let rule = GaussLegendre::new(n.min(64));
        let panels = n.div_ceil(64);
        (0..4)
            .map(|k| {
                let a = -3.0 * FRAC_PI_4 + k as f64 * 2.0 * FRAC_PI_4;
                rule.integrate_composite(a, a + 2.0 * FRAC_PI_4, panels.max(1), |phi| {
                    r_pi(phi).ln()
                })
            })
            .sum()
    })?;
    Ok(res.value)
}

fn d0_polar(rho: f64, phi: f64) -> f64 {
    d0([rho * phi.cos(), rho * phi.sin()])
}

/// `int_{R_pi} (1/A - 1/|theta|^2) dtheta`.
pub fn symbol_part() -> Result<f64> {
    let spec = QuadratureSpec::doubling(Rule::PolarProduct, 16, TOL);
    Ok(quad::integrate_polar(d0_polar, &PolarDomain::square(PI), &spec)?.value)
}

/// `int_{B_1} (1/A - 1/|theta|^2) dtheta`.
pub fn symbol_part_unit_disc() -> Result<f64> {
    let spec = QuadratureSpec::doubling(Rule::PolarProduct, 16, TOL);
    Ok(quad::integrate_polar(d0_polar, &PolarDomain::disc(1.0), &spec)?.value)
}

/// `int_{B_1} (1 - e^{-|xi|^2})/|xi|^2 - int_{R^2 \ B_1} e^{-|xi|^2}/|xi|^2`,
/// reduced to radial integrals.
pub fn gaussian_part() -> f64 {
    let rule = GaussLegendre::new(32);
    let inner = rule.integrate_composite(0.0, 1.0, 4, |rho| -(-rho * rho).exp_m1() / rho);
    // e^{-rho^2} is below 1e-30 past rho = 8.4
    let outer = rule.integrate_composite(1.0, 9.0, 32, |rho| (-rho * rho).exp() / rho);
    2.0 * PI * (inner - outer)
}

/// All ingredients of `S_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct S0Breakdown {
    /// `pi gamma`
    pub gamma_part: f64,
    /// `int_{R_pi} (1/A - 1/|theta|^2)`
    pub symbol_part: f64,
    /// `int_0^{2 pi} ln r_pi`
    pub boundary_part: f64,
    /// `(gamma_part + symbol_part + boundary_part) / (2 pi)^2`
    pub total: f64,
    /// The Gaussian integrals that equal `pi gamma`.
    pub gaussian_part: f64,
    /// `(gaussian_part + symbol_part + boundary_part) / (2 pi)^2`
    pub total_gaussian_route: f64,
    /// `int_{B_1} (1/A - 1/|theta|^2)`, reported for comparison only.
    pub symbol_part_unit_disc: f64,
    /// The same sum with the symbol integral restricted to `B_1`.
    pub total_unit_disc: f64,
}

pub fn s0_quadrature() -> Result<S0Breakdown> {
    let gamma_part = PI * euler_gamma();
    let symbol = symbol_part()?;
    let boundary = boundary_part()?;
    let gauss = gaussian_part();
    let disc = symbol_part_unit_disc()?;
    let norm = 4.0 * PI * PI;
    Ok(S0Breakdown {
        gamma_part,
        symbol_part: symbol,
        boundary_part: boundary,
        total: (gamma_part + symbol + boundary) / norm,
        gaussian_part: gauss,
        total_gaussian_route: (gauss + symbol + boundary) / norm,
        symbol_part_unit_disc: disc,
        total_unit_disc: (gamma_part + disc + boundary) / norm,
    })
}

/// `S_0`, computed once per process.
pub fn s0() -> Result<f64> {
    static CELL: OnceLock<Result<f64>> = OnceLock::new();
    CELL.get_or_init(|| s0_quadrature().map(|b| b.total)).clone()
}
