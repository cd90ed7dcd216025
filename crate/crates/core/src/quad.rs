//! Quadrature engine: periodic trapezoid on the square `[-pi, pi]^2`, polar
//! product rules on discs, squares and square annuli, Gauss-Legendre in one
//! dimension, and asymptotic tails of Bessel integrals.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::bessel::{j_unchecked, shifted_cos};

/// Largest resolution the doubling loop may reach.
pub const MAX_RESOLUTION: usize = 1 << 14;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// The rule applied on `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: Fn(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate(lo, lo + h, &f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature family selected by a [`QuadratureSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Rule {
    PeriodicTrapezoid2d,
    GaussLegendre1d,
    PolarProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Refinement {
    Fixed,
    DoublingUntilTolerance,
}

/// Grid resolution and refinement policy for one integration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    /// Points per dimension at the first level.
    pub resolution: usize,
    pub refinement: Refinement,
    pub tolerance: f64,
    pub max_resolution: usize,
}

impl QuadratureSpec {
    pub fn fixed(rule: Rule, resolution: usize) -> Self {
        Self {
            rule,
            resolution,
            refinement: Refinement::Fixed,
            tolerance: 0.0,
            max_resolution: MAX_RESOLUTION,
        }
    }

    pub fn doubling(rule: Rule, resolution: usize, tolerance: f64) -> Self {
        Self {
            rule,
            resolution,
            refinement: Refinement::DoublingUntilTolerance,
            tolerance,
            max_resolution: MAX_RESOLUTION,
        }
    }

    pub fn with_max_resolution(mut self, max_resolution: usize) -> Self {
        self.max_resolution = max_resolution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 8 {
            return Err(Error::Precondition(format!(
                "quadrature resolution must be >= 8, got {}",
                self.resolution
            )));
        }
        if self.refinement == Refinement::DoublingUntilTolerance {
            if !self.resolution.is_power_of_two() {
                return Err(Error::Precondition(format!(
                    "doubling refinement needs a power-of-two resolution, got {}",
                    self.resolution
                )));
            }
            if !(self.tolerance > 0.0) {
                return Err(Error::Precondition(format!(
                    "doubling refinement needs tolerance > 0, got {}",
                    self.tolerance
                )));
            }
        }
        Ok(())
    }
}

/// Value of a refined integral with its last-step difference.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct QuadResult {
    pub value: f64,
    /// `|I_k - I_{k-1}|` at the accepting level; zero for fixed rules.
    pub error_estimate: f64,
    pub resolution: usize,
    /// Error estimates of every doubling step, in order.
    pub history: Vec<f64>,
}

/// Runs `eval` at successive resolutions according to `spec`.
pub fn refine<F>(spec: &QuadratureSpec, mut eval: F) -> Result<QuadResult>
where
    F: FnMut(usize) -> f64,
{
    spec.validate()?;
    let mut res = spec.resolution;
    let mut prev = eval(res);
    if spec.refinement == Refinement::Fixed {
        return Ok(QuadResult {
            value: prev,
            error_estimate: 0.0,
            resolution: res,
            history: Vec::new(),
        });
    }
    let mut history = Vec::new();
    loop {
        if res * 2 > spec.max_resolution {
            return Err(Error::Convergence {
                resolution: res,
                last: prev,
                previous: f64::NAN,
            });
        }
        res *= 2;
        let cur = eval(res);
        let diff = (cur - prev).abs();
        history.push(diff);
        if diff < spec.tolerance {
            return Ok(QuadResult {
                value: cur,
                error_estimate: diff,
                resolution: res,
                history,
            });
        }
        if res * 2 > spec.max_resolution {
            return Err(Error::Convergence {
                resolution: res,
                last: cur,
                previous: prev,
            });
        }
        prev = cur;
    }
}

/// Tensor trapezoid over `[-pi, pi]^2` for integrands `2 pi`-periodic in both
/// variables.
pub fn integrate_periodic_2d<F>(f: F, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    refine(spec, |n| periodic_trapezoid_2d(&f, n))
}

pub(crate) fn periodic_trapezoid_2d<F>(f: &F, n: usize) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let h = 2.0 * PI / n as f64;
    // rows are summed in a fixed order so the result is reproducible
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t1 = -PI + i as f64 * h;
            (0..n).map(|j| f(t1, -PI + j as f64 * h)).sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() * h * h
}

/// Radius of a region boundary as a function of the polar angle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum RadiusProfile {
    Constant(f64),
    /// Boundary of the square `[-L, L]^2`: `L / max(|cos phi|, |sin phi|)`.
    Square { half_side: f64 },
}

impl RadiusProfile {
    pub fn at(&self, phi: f64) -> f64 {
        match *self {
            RadiusProfile::Constant(r) => r,
            RadiusProfile::Square { half_side } => square_radius(half_side, phi),
        }
    }
}

/// Distance from the origin to the boundary of `[-L, L]^2` in direction `phi`.
pub fn square_radius(half_side: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    half_side / c.abs().max(s.abs())
}

/// Region `{(rho, phi): inner(phi) <= rho <= outer(phi), phi in [phi0, phi1]}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PolarDomain {
    pub phi0: f64,
    pub phi1: f64,
    pub inner: RadiusProfile,
    pub outer: RadiusProfile,
}

impl PolarDomain {
    pub fn disc(radius: f64) -> Self {
        Self {
            phi0: -PI,
            phi1: PI,
            inner: RadiusProfile::Constant(0.0),
            outer: RadiusProfile::Constant(radius),
        }
    }

    pub fn square(half_side: f64) -> Self {
        Self {
            phi0: -PI,
            phi1: PI,
            inner: RadiusProfile::Constant(0.0),
            outer: RadiusProfile::Square { half_side },
        }
    }

    /// The square `[-L, L]^2` with the disc of radius `L` removed.
    pub fn square_minus_disc(half_side: f64) -> Self {
        Self {
            phi0: -PI,
            phi1: PI,
            inner: RadiusProfile::Constant(half_side),
            outer: RadiusProfile::Square { half_side },
        }
    }

    fn is_full_period(&self) -> bool {
        ((self.phi1 - self.phi0) - 2.0 * PI).abs() < 1e-14
    }

    fn has_kinks(&self) -> bool {
        matches!(self.inner, RadiusProfile::Square { .. })
            || matches!(self.outer, RadiusProfile::Square { .. })
    }

    /// Angular pieces on which both radius profiles are smooth.
    fn angular_pieces(&self) -> Vec<(f64, f64)> {
        if !self.has_kinks() {
            return vec![(self.phi0, self.phi1)];
        }
        let mut cuts = vec![self.phi0];
        let first = ((self.phi0 - FRAC_PI_4) / (PI / 2.0)).ceil() as i64;
        let mut k = first;
        loop {
            let c = FRAC_PI_4 + k as f64 * PI / 2.0;
            if c >= self.phi1 {
                break;
            }
            if c > self.phi0 {
                cuts.push(c);
            }
            k += 1;
        }
        cuts.push(self.phi1);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.phi1 > self.phi0) {
            return Err(Error::Precondition("polar domain needs phi1 > phi0".into()));
        }
        for p in [self.inner, self.outer] {
            if let RadiusProfile::Constant(r) = p {
                if r < 0.0 {
                    return Err(Error::Precondition("negative radius".into()));
                }
            }
        }
        if let RadiusProfile::Constant(r) = self.outer {
            if r <= 0.0 {
                return Err(Error::Precondition("outer radius must be > 0".into()));
            }
        }
        Ok(())
    }
}

const RADIAL_ORDER: usize = 16;

/// `int int f(rho, phi) rho drho dphi` over a polar domain.
///
/// Gauss-Legendre in `rho` along every ray. In `phi`, the trapezoid rule is
/// used for full-period domains with smooth boundaries and Gauss-Legendre on
/// each smooth angular piece otherwise. `resolution` is the number of nodes
/// per dimension (per angular piece for kinked boundaries).
pub fn integrate_polar<F>(f: F, domain: &PolarDomain, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    domain.validate()?;
    refine(spec, |n| polar_product(&f, domain, n, n))
}

/// As [`integrate_polar`] but with independent radial and angular resolutions
/// `(radial, angular)` at the first level; both double together.
pub fn integrate_polar_anisotropic<F>(
    f: F,
    domain: &PolarDomain,
    spec: &QuadratureSpec,
    radial: usize,
    angular: usize,
) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    domain.validate()?;
    let base = spec.resolution;
    refine(spec, |n| {
        let scale = n / base;
        polar_product(&f, domain, radial * scale, angular * scale)
    })
}

fn radial_rule(n_radial: usize) -> (GaussLegendre, usize) {
    if n_radial <= RADIAL_ORDER {
        (GaussLegendre::new(n_radial.max(2)), 1)
    } else {
        (GaussLegendre::new(RADIAL_ORDER), n_radial.div_ceil(RADIAL_ORDER))
    }
}

fn angular_nodes(domain: &PolarDomain, n_angular: usize) -> Vec<(f64, f64)> {
    if domain.is_full_period() && !domain.has_kinks() {
        let h = (domain.phi1 - domain.phi0) / n_angular as f64;
        return (0..n_angular)
            .map(|i| (domain.phi0 + i as f64 * h, h))
            .collect();
    }
    let (rule, panels) = radial_rule(n_angular);
    let mut out = Vec::new();
    for (a, b) in domain.angular_pieces() {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let half = 0.5 * h;
            let mid = lo + half;
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                out.push((mid + half * x, w * half));
            }
        }
    }
    out
}

fn polar_product<F>(f: &F, domain: &PolarDomain, n_radial: usize, n_angular: usize) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let (rule, panels) = radial_rule(n_radial);
    let angles = angular_nodes(domain, n_angular);
    angles
        .par_iter()
        .map(|&(phi, wphi)| {
            let lo = domain.inner.at(phi);
            let hi = domain.outer.at(phi);
            if hi <= lo {
                return 0.0;
            }
            wphi * rule.integrate_composite(lo, hi, panels, |rho| f(rho, phi) * rho)
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Integrand class of a Bessel tail: `z^{-power} J_order(z)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BesselTail {
    pub order: u32,
    pub power: f64,
}

/// Estimate of `int_{z0}^inf z^{-p} J_n(z) dz`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailEstimate {
    pub value: f64,
    /// Amplitude `(2/pi)^{1/2} z0^{-p-1/2}` of the oscillating leading term.
    pub envelope: f64,
    /// Size of the first neglected term of the asymptotic expansion.
    pub error_bound: f64,
}

fn check_tail(tail: &BesselTail, z0: f64) -> Result<()> {
    let n = tail.order as f64;
    if !(z0 >= 1.0 && z0 >= n * n) || !z0.is_finite() {
        return Err(Error::Domain(format!(
            "tail start z0 = {z0} below max(1, n^2) for order {}",
            tail.order
        )));
    }
    if tail.power < 0.0 {
        return Err(Error::Domain("tail power must be >= 0".into()));
    }
    Ok(())
}

/// Leading tail: the cosine form of `J_n` integrated by parts once.
///
/// `int_{z0}^inf z^{-p} J_n(z) dz = -(2/pi)^{1/2} z0^{-p-1/2} sin(z0 - pi n/2 - pi/4) + O(z0^{-p-3/2})`.
pub fn oscillatory_tail(tail: BesselTail, z0: f64) -> Result<TailEstimate> {
    check_tail(&tail, z0)?;
    let amp = (2.0 / PI).sqrt() * z0.powf(-tail.power - 0.5);
    let n = tail.order as usize;
    let value = -amp * shifted_cos(z0, n + 1);
    let mu = 4.0 * (tail.order as f64).powi(2);
    let next = (tail.power + 0.5) + (mu - 1.0).abs() / 8.0;
    Ok(TailEstimate {
        value,
        envelope: amp,
        error_bound: 2.0 * next * amp / z0,
    })
}

/// Full asymptotic tail: every term of the Hankel expansion of `J_n`
/// integrated by repeated parts, summed until the terms stop decreasing.
pub fn oscillatory_tail_series(tail: BesselTail, z0: f64) -> Result<TailEstimate> {
    check_tail(&tail, z0)?;
    let n = tail.order as usize;
    let mu = 4.0 * (tail.order as f64).powi(2);
    let base = tail.power + 0.5;
    let amp = (2.0 / PI).sqrt() * z0.powf(-base);
    // a_k = (mu - 1)(mu - 9)...(mu - (2k-1)^2) / (k! 8^k)
    let max_terms = 120;
    let mut a = vec![1.0; max_terms];
    for k in 1..max_terms {
        let odd = (2 * k - 1) as f64;
        a[k] = a[k - 1] * (mu - odd * odd) / (8.0 * k as f64);
    }
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut err = 0.0;
    for j in 0..max_terms {
        // beta_j = sum_k (-1)^{j-k} a_k (base + k)_{j-k}
        let mut beta = 0.0;
        for (k, &ak) in a.iter().enumerate().take(j + 1) {
            let m = j - k;
            let mut poch = 1.0;
            for i in 0..m {
                poch *= base + k as f64 + i as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            beta += sign * ak * poch;
        }
        let mag = (beta / z0.powi(j as i32)).abs();
        if mag > last {
            break;
        }
        // Re[i^{j+1} e^{i(z0 - c)}] = cos(z0 - c + (j+1) pi/2)
        let term = beta / z0.powi(j as i32) * shifted_cos(z0, (n + 3 * (j + 1)) % 4);
        sum += term;
        err = mag;
        last = mag;
        if mag < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    Ok(TailEstimate {
        value: amp * sum,
        envelope: amp,
        error_bound: amp * err,
    })
}

/// `int_a^b z^{-p} J_n(z) dz` by composite Gauss-Legendre on unit-length panels.
pub fn bessel_integral(order: u32, power: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = GaussLegendre::new(20);
    let panels = (b - a).ceil().max(1.0) as usize;
    rule.integrate_composite(a, b, panels, |z| {
        let j = j_unchecked(order, z);
        if power == 0.0 {
            j
        } else {
            j * z.powf(-power)
        }
    })
}

/// `int_{z0}^inf z^{-p} J_n(z) dz` to near machine precision: quadrature up
/// to a cutoff where the asymptotic series is sharp, then the series tail.
pub fn bessel_integral_to_infinity(order: u32, power: f64, z0: f64) -> Result<f64> {
    if !(z0 >= 0.0) {
        return Err(Error::Domain(format!("z0 must be >= 0, got {z0}")));
    }
    if z0 == 0.0 && power >= 1.0 && order < power.ceil() as u32 {
        return Err(Error::Domain("integral diverges at the origin".into()));
    }
    let n = order as f64;
    let cut = z0.max(60.0 + 2.0 * n * n);
    let head = bessel_integral(order, power, z0, cut);
    let tail = oscillatory_tail_series(BesselTail { order, power }, cut)?;
    Ok(head + tail.value)
}
