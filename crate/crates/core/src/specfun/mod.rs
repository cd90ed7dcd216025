//! Special functions: Bessel `J_n` and scaled `I_n`, the exponential integral,
//! the Euler-Mascheroni constant and derivatives of the heat Gaussian.

pub mod bessel;
pub mod expint;
pub mod gaussian;

pub use bessel::{
    bessel_i_scaled, bessel_i_scaled_sequence, bessel_j, bessel_j_asymptotic, bessel_j_sequence,
    BesselAsymptotic,
};
pub use expint::{euler_gamma, exp_integral_e1};
pub use gaussian::{gaussian_derivative, heat_gaussian, DiffOperator, MAX_DERIVATIVE_ORDER};

use crate::quad::{bessel_integral_to_infinity, GaussLegendre};

/// Euler-Mascheroni constant from the Bessel identity
/// `int_0^1 (1 - J_0(z))/z dz - int_1^inf J_0(z)/z dz + ln 2`.
pub fn euler_gamma_via_bessel() -> f64 {
    let rule = GaussLegendre::new(24);
    let head = rule.integrate(0.0, 1.0, |z| (1.0 - bessel::j_unchecked(0, z)) / z);
    let tail = bessel_integral_to_infinity(0, 1.0, 1.0).expect("z0 = 1 is inside the domain");
    head - tail + std::f64::consts::LN_2
}
