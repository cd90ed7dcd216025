//! The time-independent lattice term `Omega(x)` of the second kernel.
//!
//! With `(r, psi)` polar coordinates of `x` and `(rho, phi)` those of `theta`,
//!
//! ```text
//! Omega(x) = (I1 + I3 + I4) / (2 pi)^2
//! I1 = int_{R_pi} cos(x . theta) D0(theta) dtheta,  D0 = 1/A - 1/|theta|^2
//! I3 = int_{R_pi \ B_pi} cos(x . theta) / |theta|^2 dtheta
//! I4 = -2 pi int_{pi r}^inf J0(z)/z dz
//! ```
//!
//! and the far field is `Omega ~ cos(4 psi) / (24 pi r^2)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::constants;
use crate::error::{Error, Result};
use crate::kernel::LatticePoint;
use crate::quad::{self, PolarDomain, QuadratureSpec, Rule};
use crate::specfun::bessel::j_unchecked;
use crate::specfun::expint::euler_gamma;

/// Absolute tolerance on each of `I1`, `I2`, `I3` under grid doubling.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Smallest radius accepted by the far-field routines.
pub const ASYMPTOTIC_MIN_RADIUS: f64 = 5.0;

/// Below this radius `E` is evaluated from its Taylor expansion.
pub const E_SERIES_SWITCH: f64 = 1e-3;

/// `s^2 - 4 sin^2(s/2)`, the quartic defect of the one-dimensional symbol.
fn quartic_defect(s: f64) -> f64 {
    if s.abs() < 0.5 {
        // s^4/12 - s^6/360 + s^8/20160 - s^10/1814400 + ...
        let s2 = s * s;
        let mut term = s2 * s2 / 12.0;
        let mut sum = term;
        for k in 3..12 {
            // ratio of consecutive terms of sum_{k>=2} (-1)^k 2 s^{2k} / (2k)!
            term *= -s2 / ((2 * k - 1) as f64 * (2 * k) as f64);
            sum += term;
        }
        sum
    } else {
        let h = (0.5 * s).sin();
        s * s - 4.0 * h * h
    }
}

/// `s - sin s` without cancellation.
fn sine_defect(s: f64) -> f64 {
    if s.abs() < 0.5 {
        let s2 = s * s;
        let mut term = s * s2 / 6.0;
        let mut sum = term;
        for k in 2..12 {
            term *= -s2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        s - s.sin()
    }
}

fn symbol(theta: [f64; 2]) -> f64 {
    let a = (0.5 * theta[0]).sin();
    let b = (0.5 * theta[1]).sin();
    4.0 * (a * a + b * b)
}

/// `D0(theta) = 1/A(theta) - 1/|theta|^2`, bounded at the origin.
pub fn d0(theta: [f64; 2]) -> f64 {
    let rho2 = theta[0] * theta[0] + theta[1] * theta[1];
    if rho2 == 0.0 {
        // limit along the axes is 1/12; D0 is direction dependent at 0
        return f64::NAN;
    }
    let q = quartic_defect(theta[0]) + quartic_defect(theta[1]);
    q / (symbol(theta) * rho2)
}

/// `D(theta) = dD0/dtheta1`.
pub fn d_function(theta: [f64; 2]) -> f64 {
    let rho2 = theta[0] * theta[0] + theta[1] * theta[1];
    let q = quartic_defect(theta[0]) + quartic_defect(theta[1]);
    let a = symbol(theta);
    let t1 = theta[0];
    // theta1 A^2 - rho^4 sin(theta1), with A = rho^2 - q
    let num = rho2 * rho2 * sine_defect(t1) - 2.0 * t1 * rho2 * q + t1 * q * q;
    2.0 * num / (a * a * rho2 * rho2)
}

/// `E(rho, phi) = rho D(rho cos phi, rho sin phi)` for `0 <= rho <= pi`.
pub fn e_function(rho: f64, phi: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&rho) {
        return Err(Error::Domain(format!("E needs 0 <= rho <= pi, got {rho}")));
    }
    Ok(e_unchecked(rho, phi))
}

fn e_unchecked(rho: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    if rho <= E_SERIES_SWITCH {
        e_series(rho, c, s)
    } else {
        rho * d_function([rho * c, rho * s])
    }
}

/// `E(rho, phi)` by the series branch and by the direct formula, for
/// continuity checks at the branch switch.
pub fn e_branches(rho: f64, phi: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho <= PI) {
        return Err(Error::Domain(format!("E branches need 0 < rho <= pi, got {rho}")));
    }
    let (s, c) = phi.sin_cos();
    Ok((e_series(rho, c, s), rho * d_function([rho * c, rho * s])))
}

/// `E(0, phi) + rho^2 E_2(phi)`; `E` is even in `rho`.
fn e_series(rho: f64, c: f64, s: f64) -> f64 {
    let c2 = c * c;
    let s2 = s * s;
    let c3 = c2 * c;
    let c5 = c3 * c2;
    let s4 = s2 * s2;
    let e0 = (c3 - c5 - c * s4) / 3.0;
    let e2 = -c5 * c2 * c2 / 24.0 + c5 * c2 / 15.0 - c5 / 60.0 - c5 * s4 / 12.0 + c3 * s4 / 18.0
        - c * s4 * s4 / 24.0
        + c * s4 * s2 / 90.0;
    e0 + rho * rho * e2
}

/// `lim_{rho -> 0} E(rho, phi) = (cos 3phi - cos 5phi) / 24`.
pub fn e_limit(phi: f64) -> f64 {
    ((3.0 * phi).cos() - (5.0 * phi).cos()) / 24.0
}

/// Fourier coefficients of `phi -> E(rho, phi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularSpectrum {
    pub rho: f64,
    /// `a_0 .. a_{n_max}`
    pub a: Vec<f64>,
    /// `b_0 .. b_{n_max}`, with `b_0 = 0`.
    pub b: Vec<f64>,
}

pub const MAX_SPECTRUM_ORDER: usize = 64;

/// Fourier coefficients of `E(rho, .)` up to `n_max` by the trapezoid rule on
/// `8 n_max` (at least 64) equispaced angles.
pub fn angular_spectrum(rho: f64, n_max: usize) -> Result<AngularSpectrum> {
    if n_max > MAX_SPECTRUM_ORDER {
        return Err(Error::Range {
            name: "n_max",
            value: n_max as f64,
            limit: "n_max <= 64",
        });
    }
    if !(0.0..=PI).contains(&rho) {
        return Err(Error::Domain(format!("spectrum needs 0 <= rho <= pi, got {rho}")));
    }
    let m = (8 * n_max).max(64);
    let h = 2.0 * PI / m as f64;
    let samples: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let phi = -PI + k as f64 * h;
            let e = if rho == 0.0 { e_limit(phi) } else { e_unchecked(rho, phi) };
            (phi, e)
        })
        .collect();
    let mut a = Vec::with_capacity(n_max + 1);
    let mut b = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let nf = n as f64;
        let (mut sa, mut sb) = (0.0, 0.0);
        for &(phi, e) in &samples {
            sa += e * (nf * phi).cos();
            sb += e * (nf * phi).sin();
        }
        let norm = if n == 0 { 1.0 / m as f64 } else { 2.0 / m as f64 };
        a.push(sa * norm);
        b.push(if n == 0 { 0.0 } else { sb * norm });
    }
    Ok(AngularSpectrum { rho, a, b })
}

/// Controls for [`omega_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaOptions {
    pub tolerance: f64,
    /// Also evaluate the direct representation with `I2` for comparison.
    pub cross_check: bool,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            cross_check: false,
        }
    }
}

/// `Omega(x)` with its pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaDecomposition {
    pub r: f64,
    pub psi: f64,
    pub i1: f64,
    pub i3: f64,
    pub i4: f64,
    /// `(I1 + I3 + I4) / (2 pi)^2`
    pub omega: f64,
    /// Sum of the doubling differences of the quadratures, scaled like `omega`.
    pub error_estimate: f64,
    /// `I2` of the direct representation, when requested.
    pub i2: Option<f64>,
    /// `(2 pi gamma + I1 + I2 + L) / (2 pi)^2 + (ln r - ln 2) / (2 pi)`.
    pub omega_direct: Option<f64>,
}

/// Panels per unit phase change: two 16-point panels per oscillation at the
/// accepting level.
fn panels_for(phase_span: f64) -> usize {
    16 * ((phase_span / (2.0 * PI)).ceil() as usize + 2)
}

fn polar_oscillatory<F>(
    f: F,
    domain: &PolarDomain,
    radial_phase: f64,
    angular_phase: f64,
    tol: f64,
) -> Result<quad::QuadResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let spec = QuadratureSpec::doubling(Rule::PolarProduct, 8, tol);
    quad::integrate_polar_anisotropic(
        f,
        domain,
        &spec,
        panels_for(radial_phase),
        panels_for(angular_phase),
    )
}

/// `I1(r, psi)`.
pub fn i1(r: f64, psi: f64, tol: f64) -> Result<quad::QuadResult> {
    let rmax = PI * std::f64::consts::SQRT_2;
    polar_oscillatory(
        |rho, phi| (r * rho * (phi - psi).cos()).cos() * d0([rho * phi.cos(), rho * phi.sin()]),
        &PolarDomain::square(PI),
        r * rmax,
        r * rmax * FRAC_PI_4,
        tol,
    )
}

/// `I2(r, psi) = int_{R_pi} (cos(x . theta) - 1) / |theta|^2 dtheta`.
pub fn i2(r: f64, psi: f64, tol: f64) -> Result<quad::QuadResult> {
    let rmax = PI * std::f64::consts::SQRT_2;
    polar_oscillatory(
        |rho, phi| ((r * rho * (phi - psi).cos()).cos() - 1.0) / (rho * rho),
        &PolarDomain::square(PI),
        r * rmax,
        r * rmax * FRAC_PI_4,
        tol,
    )
}

/// `I3(r, psi)`.
pub fn i3(r: f64, psi: f64, tol: f64) -> Result<quad::QuadResult> {
    let rmax = PI * std::f64::consts::SQRT_2;
    polar_oscillatory(
        |rho, phi| (r * rho * (phi - psi).cos()).cos() / (rho * rho),
        &PolarDomain::square_minus_disc(PI),
        r * (rmax - PI),
        r * rmax * FRAC_PI_4,
        tol,
    )
}

/// `I4(r) = -2 pi int_{pi r}^inf J0(z)/z dz`.
pub fn i4(r: f64) -> Result<f64> {
    Ok(-2.0 * PI * quad::bessel_integral_to_infinity(0, 1.0, PI * r)?)
}

fn check_point(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain("Omega is defined for x != 0".into()));
    }
    Ok(())
}

/// `Omega` at the unit-lattice site `s` of `point` (the grid step is ignored:
/// the expansion uses `Omega(x/eps) = Omega(s)`).
pub fn omega_exact(point: &LatticePoint, opts: &OmegaOptions) -> Result<OmegaDecomposition> {
    if point.is_origin() {
        return Err(Error::Domain("Omega is defined for x != 0".into()));
    }
    let [a, b] = point.s.map(|v| v as f64);
    omega_polar(a.hypot(b), b.atan2(a), opts)
}

/// `Omega` at the point with polar coordinates `(r, psi)`.
pub fn omega_polar(r: f64, psi: f64, opts: &OmegaOptions) -> Result<OmegaDecomposition> {
    check_point(r)?;
    let tol = opts.tolerance;
    let (p1, p3) = rayon::join(|| i1(r, psi, tol), || i3(r, psi, tol));
    let (p1, p3) = (p1?, p3?);
    let v4 = i4(r)?;
    let norm = 4.0 * PI * PI;
    let omega = (p1.value + p3.value + v4) / norm;
    let (i2v, direct) = if opts.cross_check {
        let p2 = i2(r, psi, tol)?;
        let boundary = constants::boundary_part()?;
        let direct = (2.0 * PI * euler_gamma() + p1.value + p2.value + boundary) / norm
            + (r.ln() - std::f64::consts::LN_2) / (2.0 * PI);
        (Some(p2.value), Some(direct))
    } else {
        (None, None)
    };
    Ok(OmegaDecomposition {
        r,
        psi,
        i1: p1.value,
        i3: p3.value,
        i4: v4,
        omega,
        error_estimate: (p1.error_estimate + p3.error_estimate) / norm,
        i2: i2v,
        omega_direct: direct,
    })
}

/// [`omega_polar`] at many `(r, psi)` points in parallel, in input order.
pub fn omega_batch(points: &[(f64, f64)], opts: &OmegaOptions) -> Result<Vec<OmegaDecomposition>> {
    points
        .par_iter()
        .map(|&(r, psi)| omega_polar(r, psi, opts))
        .collect()
}

/// `Omega(s)` with default options.
pub fn omega(point: &LatticePoint) -> Result<f64> {
    Ok(omega_exact(point, &OmegaOptions::default())?.omega)
}

/// Leading far-field term `cos(4 psi) / (24 pi r^2)`.
pub fn omega_leading(r: f64, psi: f64) -> f64 {
    (4.0 * psi).cos() / (24.0 * PI * r * r)
}

/// Far-field comparison at one site.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaAsymptotic {
    pub r: f64,
    pub psi: f64,
    pub omega: f64,
    pub leading: f64,
    /// `omega - leading`
    pub residual: f64,
    /// `r^{5/2} |omega - leading|`
    pub residual_order_check: f64,
}

pub fn omega_asymptotic(point: &LatticePoint) -> Result<OmegaAsymptotic> {
    let [a, b] = point.s.map(|v| v as f64);
    let r = a.hypot(b);
    if r < ASYMPTOTIC_MIN_RADIUS {
        return Err(Error::Domain(format!(
            "far-field regime needs r >= 5, got {r}"
        )));
    }
    let psi = b.atan2(a);
    let omega = omega_polar(r, psi, &OmegaOptions::default())?.omega;
    let leading = omega_leading(r, psi);
    let residual = omega - leading;
    Ok(OmegaAsymptotic {
        r,
        psi,
        omega,
        leading,
        residual,
        residual_order_check: r.powf(2.5) * residual.abs(),
    })
}

/// `psi` lies in the sector pair around the `x1` axis.
pub fn in_first_sector(psi: f64) -> bool {
    let w = wrap(psi);
    w.abs() <= FRAC_PI_4 + 1e-15 || w.abs() >= 3.0 * FRAC_PI_4 - 1e-15
}

fn wrap(psi: f64) -> f64 {
    let mut w = (psi + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        w = PI;
    }
    w
}

/// Pieces of `I3` near the `x1` axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct I3Structure {
    pub r: f64,
    /// Angle actually evaluated, in the first sector pair.
    pub psi: f64,
    pub i3: f64,
    /// `-(2 sqrt 2 / pi) sin(pi r - pi/4) r^{-3/2}`
    pub oscillatory: f64,
    /// `-(2/r) J1(pi r)`, the boundary term after one integration by parts.
    pub tilde: f64,
    /// `-(1/(r cos psi)) int_{R_pi \ B_pi} sin(x . theta) d/dtheta1 |theta|^{-2} dtheta`
    pub hat: f64,
    /// `i3 - oscillatory - hat`
    pub remainder: f64,
}

/// Splits `I3(r, psi)`; angles in the other sector pair are rotated by `pi/2`.
pub fn i3_structure(r: f64, psi: f64) -> Result<I3Structure> {
    if r < ASYMPTOTIC_MIN_RADIUS {
        return Err(Error::Domain(format!("I3 split needs r >= 5, got {r}")));
    }
    let psi = if in_first_sector(psi) { wrap(psi) } else { wrap(psi + FRAC_PI_2) };
    let tol = DEFAULT_TOLERANCE;
    let v3 = i3(r, psi, tol)?.value;
    let rmax = PI * std::f64::consts::SQRT_2;
    let hat_integral = polar_oscillatory(
        |rho, phi| (r * rho * (phi - psi).cos()).sin() * phi.cos() / (rho * rho * rho),
        &PolarDomain::square_minus_disc(PI),
        r * (rmax - PI),
        r * rmax * FRAC_PI_4,
        tol,
    )?
    .value;
    let hat = 2.0 * hat_integral / (r * psi.cos());
    let oscillatory =
        -(2.0 * std::f64::consts::SQRT_2 / PI) * (PI * r - FRAC_PI_4).sin() * r.powf(-1.5);
    Ok(I3Structure {
        r,
        psi,
        i3: v3,
        oscillatory,
        tilde: -2.0 / r * j_unchecked(1, PI * r),
        hat,
        remainder: v3 - oscillatory - hat,
    })
}

/// `Sigma1(r, psi) = int_{B_pi} sin(x . theta) D(theta) dtheta`.
pub fn sigma1(r: f64, psi: f64) -> Result<f64> {
    check_point(r)?;
    let spec = QuadratureSpec::doubling(Rule::PolarProduct, 8, DEFAULT_TOLERANCE);
    let angular = ((2.0 * r * PI + 64.0) as usize).next_power_of_two();
    Ok(quad::integrate_polar_anisotropic(
        |rho, phi| (r * rho * (phi - psi).cos()).sin() * e_unchecked(rho, phi) / rho,
        &PolarDomain::disc(PI),
        &spec,
        panels_for(r * PI),
        angular / 2,
    )?
    .value)
}

/// `-(pi / (12 r)) (cos 3psi + cos 5psi)`, the predicted large-`r` form of `Sigma1`.
pub fn sigma1_leading(r: f64, psi: f64) -> f64 {
    -PI / (12.0 * r) * ((3.0 * psi).cos() + (5.0 * psi).cos())
}

/// Least-squares fit of `sum_k (c_k cos k psi + s_k sin k psi)` to samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicFit {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl HarmonicFit {
    /// Amplitude `sqrt(c_k^2 + s_k^2)` of harmonic `k`.
    pub fn amplitude(&self, k: usize) -> f64 {
        self.cos[k].hypot(self.sin[k])
    }
}

/// Fits harmonics `0..=k_max` by least squares (normal equations).
pub fn fit_harmonics(samples: &[(f64, f64)], k_max: usize) -> Result<HarmonicFit> {
    let m = 2 * k_max + 1;
    if samples.len() < m {
        return Err(Error::Fit(format!(
            "{} samples cannot determine {m} harmonic coefficients",
            samples.len()
        )));
    }
    let basis = |psi: f64| -> Vec<f64> {
        let mut v = vec![1.0];
        for k in 1..=k_max {
            v.push((k as f64 * psi).cos());
            v.push((k as f64 * psi).sin());
        }
        v
    };
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for &(psi, y) in samples {
        let phi = basis(psi);
        for i in 0..m {
            atb[i] += phi[i] * y;
            for j in 0..m {
                ata[i][j] += phi[i] * phi[j];
            }
        }
    }
    let x = solve(ata, atb).ok_or_else(|| Error::Fit("singular harmonic system".into()))?;
    let mut cos = vec![x[0]];
    let mut sin = vec![0.0];
    for k in 1..=k_max {
        cos.push(x[2 * k - 1]);
        sin.push(x[2 * k]);
    }
    Ok(HarmonicFit { cos, sin })
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * y;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Lattice sites with `r_lo <= |s| <= r_hi`.
pub fn lattice_annulus(r_lo: f64, r_hi: f64) -> Vec<[i64; 2]> {
    let m = r_hi.ceil() as i64;
    let mut out = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            let r = (a as f64).hypot(b as f64);
            if r >= r_lo && r <= r_hi {
                out.push([a, b]);
            }
        }
    }
    out
}

/// `Omega` on a set of sites, computing one representative per orbit of the
/// square symmetry group.
pub fn omega_on_sites(sites: &[[i64; 2]]) -> Result<Vec<f64>> {
    let canon = |s: [i64; 2]| {
        let (a, b) = (s[0].abs(), s[1].abs());
        if a >= b {
            [a, b]
        } else {
            [b, a]
        }
    };
    let mut reps: Vec<[i64; 2]> = sites.iter().map(|&s| canon(s)).collect();
    reps.sort_unstable();
    reps.dedup();
    let values: Vec<f64> = reps
        .par_iter()
        .map(|s| omega(&LatticePoint::unit(s[0], s[1])))
        .collect::<Result<_>>()?;
    Ok(sites
        .iter()
        .map(|&s| {
            let idx = reps.binary_search(&canon(s)).expect("representative present");
            values[idx]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_limit_forms_agree() {
        for k in 0..50 {
            let phi = -PI + k as f64 * 0.13;
            let (s, c) = phi.sin_cos();
            let poly = (c.powi(3) - c.powi(5) - s.powi(4) * c) / 3.0;
            assert!((poly - e_limit(phi)).abs() < 1e-15);
            assert!((e_function(0.0, phi).unwrap() - e_limit(phi)).abs() < 1e-15);
        }
        assert_eq!(e_function(0.0, 0.0).unwrap(), 0.0);
        assert!(e_function(3.5, 0.0).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn e_against_extended_precision() {
        // 50-digit evaluations of rho D(rho cos phi, rho sin phi)
        let cases = [
            (0.01, PI / 6.0, 0.036_084_846_639_628_769_547),
            (0.5, 0.7, 0.018_563_524_843_054_581_065),
            (2.0, -1.3, -0.096_342_611_424_288_016_830),
        ];
        for (rho, phi, want) in cases {
            assert!((e_function(rho, phi).unwrap() - want).abs() < 1e-12, "{rho} {phi}");
        }
    }

    #[test]
    fn e_continuous_across_switch() {
        for k in 0..40 {
            let phi = -PI + k as f64 * 0.157;
            let below = e_function(E_SERIES_SWITCH, phi).unwrap();
            let above = e_function(E_SERIES_SWITCH * (1.0 + 1e-12), phi).unwrap();
            assert!((below - above).abs() < 1e-9);
        }
    }

    #[test]
    fn d0_is_bounded_and_stable_near_origin() {
        let v = d0([1e-6, 0.0]);
        assert!((v - 1.0 / 12.0).abs() < 1e-10);
        let raw = |t: [f64; 2]| 1.0 / symbol(t) - 1.0 / (t[0] * t[0] + t[1] * t[1]);
        assert!((d0([0.7, -1.9]) - raw([0.7, -1.9])).abs() < 1e-14);
    }

    #[test]
    fn harmonic_fit_recovers_coefficients() {
        let samples: Vec<(f64, f64)> = (0..40)
            .map(|k| {
                let p = k as f64 * 0.3;
                (p, 0.5 + 2.0 * (4.0 * p).cos() - 0.25 * (2.0 * p).sin())
            })
            .collect();
        let fit = fit_harmonics(&samples, 6).unwrap();
        assert!((fit.cos[0] - 0.5).abs() < 1e-12);
        assert!((fit.cos[4] - 2.0).abs() < 1e-12);
        assert!((fit.sin[2] + 0.25).abs() < 1e-12);
        assert!(fit.amplitude(3) < 1e-12);
    }

    #[test]
    fn sector_rotation() {
        assert!(in_first_sector(0.0));
        assert!(in_first_sector(PI));
        assert!(!in_first_sector(FRAC_PI_2));
        assert!(in_first_sector(-3.0));
    }
}
