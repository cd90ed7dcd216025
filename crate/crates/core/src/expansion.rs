//! Large-time asymptotic expansions of `u` and `v` and their residuals
//! against the exact kernels.
//!
//! ```text
//! d^J u(x, t) ~ sum_{n<N} eps^{2n} t^{-(n+1+J)} H_{Jn}(x / sqrt t)
//! v(x, t)     ~ F_0(y) + Omega(x/eps) + sum_{1<=n<N} eps^{2n} t^{-n} F_n(y)
//! v(0, t)     ~ H(0) ln(t/eps^2) + S_0 - sum_{1<=n<N} eps^{2n} t^{-n} H_{0n}(0)/n
//! ```
//!
//! `H_{0n} = L_n H` with `L_1 = (2/4!) (d1^4 + d2^4)` and
//! `L_2 = (2/6!) (d1^6 + d2^6) + (4/(2! 4!^2)) (d1^4 + d2^4)^2`. For `J >= 1`
//! the terms are the exact time derivatives of the `J = 0` terms, using
//! `d/dt [t^{-k} (P(d) H)(x/sqrt t)] = t^{-k-1} (P(d) (Delta + 1 - k + deg P / 2) H)(y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::kernel::{self, KernelQuery, LatticePoint};
use crate::omega;
use crate::quad::{self, GaussLegendre, QuadratureSpec, Rule};
use crate::specfun::expint::e1_unchecked;
use crate::specfun::gaussian::{heat_gaussian, DiffOperator};

/// Highest supported term index `n`.
pub const MAX_TERM: u32 = 2;
/// Highest supported time-derivative order `J`.
pub const MAX_J: u32 = 1;

/// Coefficients of the correction operators `L_1` and `L_2`.
///
/// The defaults are the Taylor coefficients of `e^{-t A}`; the fields are
/// public so that verification runs can deliberately corrupt them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Coefficients {
    /// Coefficient of `d1^4 + d2^4` in `L_1`.
    pub h01: f64,
    /// Coefficient of `d1^6 + d2^6` in `L_2`.
    pub h02_sixth: f64,
    /// Coefficient of `(d1^4 + d2^4)^2` in `L_2`.
    pub h02_square: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            h01: 2.0 / 24.0,
            h02_sixth: 2.0 / 720.0,
            h02_square: 4.0 / (2.0 * 24.0 * 24.0),
        }
    }
}

fn check_term(j: u32, n: u32) -> Result<()> {
    if j > MAX_J || n > MAX_TERM {
        return Err(Error::Range {
            name: "(J, n)",
            value: (10 * j + n) as f64,
            limit: "J <= 1 and n <= 2",
        });
    }
    Ok(())
}

/// `P(d) -> P(d) (Delta + 1 - k + deg/2)` applied monomial by monomial.
fn time_derivative(op: &DiffOperator, k: u32) -> DiffOperator {
    let lap = DiffOperator::laplacian();
    op.terms().fold(DiffOperator::default(), |acc, ((a, b), c)| {
        let mono = DiffOperator::monomial(a, b, c);
        let shift = 1.0 - k as f64 + (a + b) as f64 / 2.0;
        acc.add(&mono.compose(&lap)).add(&mono.scale(shift))
    })
}

/// The operator `P` with `H_{Jn} = P(d) H`.
pub fn h_operator(j: u32, n: u32, coeffs: &Coefficients) -> Result<DiffOperator> {
    check_term(j, n)?;
    let mut op = match n {
        0 => DiffOperator::identity(),
        1 => DiffOperator::axis_sum(4).scale(coeffs.h01),
        _ => DiffOperator::axis_sum(6)
            .scale(coeffs.h02_sixth)
            .add(&DiffOperator::axis_sum(4).pow(2).scale(coeffs.h02_square)),
    };
    for step in 0..j {
        op = time_derivative(&op, n + 1 + step);
    }
    Ok(op)
}

/// `H_{Jn}(y)` with the default coefficients.
pub fn h_term(j: u32, n: u32, y: [f64; 2]) -> Result<f64> {
    h_term_with(j, n, y, &Coefficients::default())
}

pub fn h_term_with(j: u32, n: u32, y: [f64; 2], coeffs: &Coefficients) -> Result<f64> {
    h_operator(j, n, coeffs)?.apply_to_gaussian(y)
}

/// `F_0(y) = (1/4 pi) E_1(|y|^2 / 4)`.
fn f0(r: f64) -> f64 {
    e1_unchecked(r * r / 4.0) / (4.0 * PI)
}

/// `F_n(y)`: `F_0` in closed form, `F_n = -(2/r^{2n}) int_0^r rho^{2n-1} H_{0n}(rho, phi) drho`
/// by Gauss-Legendre along the ray through `y`.
pub fn f_term(n: u32, y: [f64; 2]) -> Result<f64> {
    f_term_with(n, y, &Coefficients::default())
}

pub fn f_term_with(n: u32, y: [f64; 2], coeffs: &Coefficients) -> Result<f64> {
    check_term(0, n)?;
    let r = y[0].hypot(y[1]);
    if r == 0.0 {
        return Err(Error::Domain("F_n is not defined at y = 0".into()));
    }
    if n == 0 {
        return Ok(f0(r));
    }
    let op = h_operator(0, n, coeffs)?;
    let (c, s) = (y[0] / r, y[1] / r);
    let p = 2 * n as i32 - 1;
    let spec = QuadratureSpec::doubling(Rule::GaussLegendre1d, 64, 1e-12);
    let rule = GaussLegendre::new(16);
    let integral = quad::refine(&spec, |m| {
        rule.integrate_composite(0.0, r, m / 16, |rho| {
            rho.powi(p)
                * op
                    .apply_to_gaussian([rho * c, rho * s])
                    .expect("operator order is within the derivative table")
        })
    })?;
    Ok(-2.0 / r.powi(2 * n as i32) * integral.value)
}

/// Which kernel an [`ExpansionReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansionKind {
    U,
    VOffOrigin,
    VOrigin,
}

/// Settings shared by the expansion evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionOptions {
    /// Regime start in units of `eps^2`: `t >= t0 eps^2`.
    pub t0: f64,
    pub coefficients: Coefficients,
    /// Include `Omega(x/eps)` off the origin.
    pub include_omega: bool,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            t0: 1.0,
            coefficients: Coefficients::default(),
            include_omega: true,
        }
    }
}

/// A truncated expansion, its pieces, and its residual against the kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub kind: ExpansionKind,
    pub s: [i64; 2],
    pub eps: f64,
    pub t: f64,
    pub j: u32,
    pub n_terms: u32,
    pub t0: f64,
    /// `eps^{2n} t^{-...} H_{Jn}` or `F_n` contributions, `n = 0..N`.
    pub terms: Vec<f64>,
    /// `Omega(x/eps)` off the origin, when included.
    pub omega: Option<f64>,
    /// `H(0) ln(t/eps^2)` at the origin.
    pub log_part: Option<f64>,
    /// `S_0` at the origin.
    pub s0: Option<f64>,
    pub value: f64,
    pub exact: f64,
    /// `exact - value`
    pub residual: f64,
    /// Residual scaled by the predicted decay: `t^{N+1+J}/eps^{2N}` for `u`,
    /// `t^N / eps^{2N}` for `v`.
    pub bound_check: f64,
    /// Terms with `J >= 1, n >= 1` come from the time-derivative rule rather
    /// than an explicitly printed formula.
    pub derived_terms: bool,
}

fn check_regime(t: f64, eps: f64, t0: f64) -> Result<()> {
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!("t0 must be > 0, got {t0}")));
    }
    if !(t >= t0 * eps * eps) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "t = {t} below the asymptotic regime t >= t0 eps^2 = {}",
            t0 * eps * eps
        )));
    }
    Ok(())
}

fn check_order(n_terms: u32, max: u32) -> Result<()> {
    if n_terms == 0 || n_terms > max {
        return Err(Error::Range {
            name: "N",
            value: n_terms as f64,
            limit: "1 <= N <= 3 (u, v at the origin), 1 <= N <= 2 (v elsewhere)",
        });
    }
    Ok(())
}

/// Truncated expansion of `d^J u / dt^J` with `N` terms.
pub fn u_expansion(query: &KernelQuery, n_terms: u32, opts: &ExpansionOptions) -> Result<ExpansionReport> {
    check_order(n_terms, MAX_TERM + 1)?;
    check_term(query.j, 0)?;
    let eps = query.point.eps;
    let t = query.t;
    check_regime(t, eps, opts.t0)?;
    let x = query.point.x();
    let y = [x[0] / t.sqrt(), x[1] / t.sqrt()];
    let terms = (0..n_terms)
        .map(|n| {
            let h = h_term_with(query.j, n, y, &opts.coefficients)?;
            Ok(eps.powi(2 * n as i32) / t.powi((n + 1 + query.j) as i32) * h)
        })
        .collect::<Result<Vec<_>>>()?;
    let value: f64 = terms.iter().sum();
    let exact = kernel::u_exact(query)?;
    let residual = exact - value;
    let bound_check =
        residual * t.powi((n_terms + 1 + query.j) as i32) / eps.powi(2 * n_terms as i32);
    Ok(ExpansionReport {
        kind: ExpansionKind::U,
        s: query.point.s,
        eps,
        t,
        j: query.j,
        n_terms,
        t0: opts.t0,
        terms,
        omega: None,
        log_part: None,
        s0: None,
        value,
        exact,
        residual,
        bound_check,
        derived_terms: query.j >= 1 && n_terms >= 2,
    })
}

/// Truncated expansion of `v` at `x != 0` with `N` terms.
pub fn v_expansion_offorigin(
    point: &LatticePoint,
    t: f64,
    n_terms: u32,
    opts: &ExpansionOptions,
) -> Result<ExpansionReport> {
    if point.is_origin() {
        return Err(Error::Domain(
            "the off-origin expansion needs x != 0; use v_expansion_origin".into(),
        ));
    }
    check_order(n_terms, MAX_TERM)?;
    let eps = point.eps;
    check_regime(t, eps, opts.t0)?;
    let x = point.x();
    let y = [x[0] / t.sqrt(), x[1] / t.sqrt()];
    let terms = (0..n_terms)
        .map(|n| Ok(eps.powi(2 * n as i32) / t.powi(n as i32) * f_term_with(n, y, &opts.coefficients)?))
        .collect::<Result<Vec<_>>>()?;
    let omega = if opts.include_omega {
        Some(omega::omega(&LatticePoint::unit(point.s[0], point.s[1]))?)
    } else {
        None
    };
    let value = terms.iter().sum::<f64>() + omega.unwrap_or(0.0);
    let exact = kernel::v_exact(point, t)?;
    let residual = exact - value;
    Ok(ExpansionReport {
        kind: ExpansionKind::VOffOrigin,
        s: point.s,
        eps,
        t,
        j: 0,
        n_terms,
        t0: opts.t0,
        terms,
        omega,
        log_part: None,
        s0: None,
        value,
        exact,
        residual,
        bound_check: residual * t.powi(n_terms as i32) / eps.powi(2 * n_terms as i32),
        derived_terms: false,
    })
}

/// Truncated logarithmic law for `v(0, t)` with `N` terms.
pub fn v_expansion_origin(t: f64, eps: f64, n_terms: u32, opts: &ExpansionOptions) -> Result<ExpansionReport> {
    check_order(n_terms, MAX_TERM + 1)?;
    let point = LatticePoint::new(0, 0, eps)?;
    check_regime(t, eps, opts.t0)?;
    let log_part = heat_gaussian([0.0, 0.0]) * (t / (eps * eps)).ln();
    let s0 = constants::s0()?;
    let terms: Vec<f64> = (1..n_terms)
        .map(|n| {
            let h = h_term_with(0, n, [0.0, 0.0], &opts.coefficients)?;
            Ok(-eps.powi(2 * n as i32) / t.powi(n as i32) * h / n as f64)
        })
        .collect::<Result<_>>()?;
    let value = log_part + s0 + terms.iter().sum::<f64>();
    let exact = kernel::v_exact(&point, t)?;
    let residual = exact - value;
    Ok(ExpansionReport {
        kind: ExpansionKind::VOrigin,
        s: [0, 0],
        eps,
        t,
        j: 0,
        n_terms,
        t0: opts.t0,
        terms,
        omega: None,
        log_part: Some(log_part),
        s0: Some(s0),
        value,
        exact,
        residual,
        bound_check: residual * t.powi(n_terms as i32) / eps.powi(2 * n_terms as i32),
        derived_terms: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gaussian::gaussian_derivative;

    #[test]
    fn explicit_terms_at_origin() {
        let h0 = 1.0 / (4.0 * PI);
        assert_eq!(h_term(0, 0, [0.0, 0.0]).unwrap(), h0);
        let d4 = gaussian_derivative(4, 0, [0.0, 0.0]).unwrap();
        assert!((h_term(0, 1, [0.0, 0.0]).unwrap() - 4.0 / 24.0 * d4).abs() < 1e-16);
        assert!((h_term(0, 1, [0.0, 0.0]).unwrap() * 4.0 * PI - 0.125).abs() < 1e-15);
        assert!((h_term(0, 2, [0.0, 0.0]).unwrap() * 4.0 * PI - 0.0390625).abs() < 1e-15);
        assert!(h_term(2, 0, [0.0, 0.0]).is_err());
        assert!(h_term(0, 3, [0.0, 0.0]).is_err());
    }

    #[test]
    fn derivative_terms_match_time_differences() {
        // t^{-(n+2)} H_{1n}(x/sqrt t) = d/dt [t^{-(n+1)} H_{0n}(x/sqrt t)]
        let x = [1.3, -0.7];
        let t = 2.0;
        for n in 0..=2 {
            let g = |t: f64| {
                let y = [x[0] / t.sqrt(), x[1] / t.sqrt()];
                h_term(0, n, y).unwrap() / t.powi(n as i32 + 1)
            };
            let h = 1e-3;
            let fd = (g(t - 2.0 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2.0 * h)) / (12.0 * h);
            let y = [x[0] / t.sqrt(), x[1] / t.sqrt()];
            let exact = h_term(1, n, y).unwrap() / t.powi(n as i32 + 2);
            assert!((fd - exact).abs() < 1e-10, "n={n}: {fd} vs {exact}");
        }
    }

    #[test]
    fn f0_closed_form_against_defining_integral() {
        let rule = GaussLegendre::new(32);
        for r in [0.1, 0.5, 2.0, 6.0] {
            // (1/2 pi) int_r^inf e^{-rho^2/4}/rho drho, truncated where the integrand underflows
            let direct = rule.integrate_composite(r, 40.0, 200, |rho| (-rho * rho / 4.0).exp() / rho)
                / (2.0 * PI);
            assert!((f_term(0, [r, 0.0]).unwrap() - direct).abs() < 1e-12);
        }
        assert!((f_term(0, [2.0, 0.0]).unwrap() - 0.017459).abs() < 1e-5);
        assert!(f_term(1, [0.0, 0.0]).is_err());
    }

    #[test]
    fn regime_and_order_checks() {
        let q = KernelQuery::new(LatticePoint::new(1, 0, 0.5).unwrap(), 0.1, 0);
        assert!(u_expansion(&q, 1, &ExpansionOptions::default()).is_err());
        let q = KernelQuery::new(LatticePoint::unit(1, 0), 10.0, 0);
        assert!(u_expansion(&q, 4, &ExpansionOptions::default()).is_err());
        assert!(u_expansion(&q, 3, &ExpansionOptions::default()).is_ok());
    }
}
