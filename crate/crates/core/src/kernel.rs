//! Exact discrete Green's functions of the heat equation on `eps Z^2`.
//!
//! `u` solves `u_t = Delta_eps u` with `u(., 0) = delta_eps`; `v` solves
//! `v_t = Delta_eps v + delta_eps` with `v(., 0) = 0`, so `v = int_0^t u`.
//! Both reduce to the unit lattice by
//! `d^J u^eps(x, t) = eps^{-2(J+1)} d^J u^1(x/eps, t/eps^2)` and
//! `v^eps(x, t) = v^1(x/eps, t/eps^2)`.
//!
//! Two independent routes are provided for each kernel. The spectral route
//! applies the periodic trapezoid rule to the Fourier representation over
//! `[-pi, pi]^2`. The product route uses `u^1(s, tau) = g_{s1}(tau) g_{s2}(tau)`
//! with `g_a(tau) = e^{-2 tau} I_a(2 tau)`, the one-dimensional lattice kernel,
//! whose time derivative is the one-dimensional discrete Laplacian in `a`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre, QuadratureSpec, Rule};
use crate::specfun::bessel::{i_scaled_sequence_unchecked, I_MAX_ARG, I_MAX_ORDER};

/// Largest time-derivative order accepted by the kernel routes.
pub const MAX_TIME_DERIVATIVE: u32 = 6;

/// Absolute tolerance of the spectral doubling loop on the unit lattice.
const SPECTRAL_TOL: f64 = 1e-14;

/// A site `x = eps s` of the lattice `eps Z^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticePoint {
    pub s: [i64; 2],
    pub eps: f64,
}

impl LatticePoint {
    pub fn new(s1: i64, s2: i64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps must be finite and > 0, got {eps}")));
        }
        Ok(Self { s: [s1, s2], eps })
    }

    /// Unit-lattice point.
    pub fn unit(s1: i64, s2: i64) -> Self {
        Self {
            s: [s1, s2],
            eps: 1.0,
        }
    }

    pub fn x(&self) -> [f64; 2] {
        [self.eps * self.s[0] as f64, self.eps * self.s[1] as f64]
    }

    pub fn is_origin(&self) -> bool {
        self.s == [0, 0]
    }

    /// `|x|`
    pub fn radius(&self) -> f64 {
        let x = self.x();
        x[0].hypot(x[1])
    }

    /// Polar angle of `x` in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        let x = self.x();
        x[1].atan2(x[0])
    }

    /// The eight images under the symmetry group of the square lattice.
    pub fn square_orbit(&self) -> [LatticePoint; 8] {
        let [a, b] = self.s;
        let e = self.eps;
        [
            [a, b],
            [-a, b],
            [a, -b],
            [-a, -b],
            [b, a],
            [-b, a],
            [b, -a],
            [-b, -a],
        ]
        .map(|s| LatticePoint { s, eps: e })
    }

    fn abs_s(&self) -> [usize; 2] {
        [self.s[0].unsigned_abs() as usize, self.s[1].unsigned_abs() as usize]
    }
}

/// Evaluation request for `d^J u / dt^J` at a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelQuery {
    pub point: LatticePoint,
    pub t: f64,
    pub j: u32,
}

impl KernelQuery {
    pub fn new(point: LatticePoint, t: f64, j: u32) -> Self {
        Self { point, t, j }
    }

    fn validate(&self) -> Result<()> {
        if !(self.point.eps > 0.0) {
            return Err(Error::Domain("eps must be > 0".into()));
        }
        check_time(self.t)?;
        if self.j > MAX_TIME_DERIVATIVE {
            return Err(Error::Range {
                name: "J",
                value: self.j as f64,
                limit: "J <= 6",
            });
        }
        if self.t == 0.0 && self.j >= 1 {
            return Err(Error::Domain(
                "time derivatives are not defined at t = 0".into(),
            ));
        }
        Ok(())
    }

    /// Unit-lattice time `tau = t / eps^2`.
    pub fn tau(&self) -> f64 {
        self.t / (self.point.eps * self.point.eps)
    }

    fn scale(&self) -> f64 {
        self.point.eps.powi(-2 * (self.j as i32 + 1))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Symbol of `-Delta_1`: `A(xi) = 2 (2 - cos xi_1 - cos xi_2)`.
pub fn symbol_a(xi: [f64; 2]) -> f64 {
    // 4 sin^2(x/2) avoids the cancellation in 1 - cos x near 0
    let a = (0.5 * xi[0]).sin();
    let b = (0.5 * xi[1]).sin();
    4.0 * (a * a + b * b)
}

/// Which evaluation route a kernel value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    Spectral,
    Product,
    TimeIntegral,
}

fn delta(point: &LatticePoint) -> f64 {
    if point.is_origin() {
        point.eps.powi(-2)
    } else {
        0.0
    }
}

fn check_product_envelope(tau: f64, max_order: usize) -> Result<()> {
    if 2.0 * tau > I_MAX_ARG {
        return Err(Error::Range {
            name: "2 t / eps^2",
            value: 2.0 * tau,
            limit: "2 t / eps^2 <= 1e4 on the product route",
        });
    }
    if max_order > I_MAX_ORDER as usize {
        return Err(Error::Range {
            name: "|s| + J",
            value: max_order as f64,
            limit: "|s_i| + J <= 400 on the product route",
        });
    }
    Ok(())
}

/// Coefficients of `(E^{-1} - 2 + E)^j` for the shift `E`, indexed by `m + j`.
fn second_difference_power(j: u32) -> Vec<f64> {
    let n = 2 * j as usize;
    let mut binom = vec![1.0; n + 1];
    for k in 1..n {
        binom[k] = binom[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    (0..=n)
        .map(|k| if k % 2 == 0 { binom[k] } else { -binom[k] })
        .collect()
}

/// `d^j g_a / dtau^j` from the scaled sequence `g`.
fn g_derivative(g: &[f64], a: usize, j: u32) -> f64 {
    let c = second_difference_power(j);
    let j = j as i64;
    (-j..=j)
        .map(|m| c[(m + j) as usize] * g[(a as i64 + m).unsigned_abs() as usize])
        .sum()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `d^J u^1(s, tau) / dtau^J` from the scaled sequence `g` at `z = 2 tau`.
fn product_from_sequence(g: &[f64], s: [usize; 2], j: u32) -> f64 {
    (0..=j)
        .map(|k| binomial(j, k) * g_derivative(g, s[0], k) * g_derivative(g, s[1], j - k))
        .sum()
}

/// Product route for `d^J u^eps / dt^J`.
pub fn u_product(query: &KernelQuery) -> Result<f64> {
    query.validate()?;
    let tau = query.tau();
    if tau == 0.0 {
        return Ok(delta(&query.point));
    }
    let s = query.point.abs_s();
    let n_max = s[0].max(s[1]) + query.j as usize;
    check_product_envelope(tau, n_max)?;
    let g = i_scaled_sequence_unchecked(n_max, 2.0 * tau);
    Ok(query.scale() * product_from_sequence(&g, s, query.j))
}

/// Trapezoid points per dimension that resolve the Fourier modes of
/// `e^{-tau A}` well below rounding at frequency `band`.
fn spectral_resolution(tau: f64, band: usize) -> usize {
    let n = (160.0 * tau).sqrt() + band as f64 + 16.0;
    (n.ceil() as usize).next_power_of_two().max(16)
}

/// Spectral route for `d^J u^eps / dt^J`: the periodic trapezoid rule applied
/// to `(2 pi)^{-2} int e^{-tau A} (-A)^J cos(s . theta) dtheta`.
pub fn u_spectral(query: &KernelQuery) -> Result<f64> {
    query.validate()?;
    let tau = query.tau();
    let [s1, s2] = query.point.s.map(|v| v as f64);
    let j = query.j as i32;
    let band = query.point.abs_s()[0] + query.point.abs_s()[1] + 2 * query.j as usize;
    let n0 = spectral_resolution(tau, band);
    let spec = QuadratureSpec::doubling(Rule::PeriodicTrapezoid2d, (n0 / 2).max(8), SPECTRAL_TOL);
    let res = quad::integrate_periodic_2d(
        |t1, t2| {
            let a = symbol_a([t1, t2]);
            (-tau * a).exp() * (-a).powi(j) * (s1 * t1 + s2 * t2).cos()
        },
        &spec,
    )?;
    Ok(query.scale() * res.value / (4.0 * PI * PI))
}

/// `d^J u^eps / dt^J`; the product route inside its envelope, the spectral
/// route beyond it.
pub fn u_exact(query: &KernelQuery) -> Result<f64> {
    query.validate()?;
    if query.t == 0.0 {
        return Ok(delta(&query.point));
    }
    let s = query.point.abs_s();
    if 2.0 * query.tau() <= I_MAX_ARG && s[0].max(s[1]) + (query.j as usize) <= I_MAX_ORDER as usize
    {
        u_product(query)
    } else {
        u_spectral(query)
    }
}

/// `(1 - e^{-tau a}) / a`, continued by its limit `tau` at `a = 0`.
fn v_multiplier(tau: f64, a: f64) -> f64 {
    let x = tau * a;
    if x < 1e-8 {
        tau * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / a
    }
}

/// Spectral route for `v^eps(x, t)`: the trapezoid rule on
/// `(2 pi)^{-2} int (1 - e^{-tau A}) / A cos(s . theta) dtheta`.
pub fn v_spectral(point: &LatticePoint, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let tau = t / (point.eps * point.eps);
    let [s1, s2] = point.s.map(|v| v as f64);
    let abs = point.abs_s();
    let n0 = spectral_resolution(tau, abs[0] + abs[1]);
    let tol = SPECTRAL_TOL * tau.max(1.0);
    let spec = QuadratureSpec::doubling(Rule::PeriodicTrapezoid2d, (n0 / 2).max(8), tol);
    let res = quad::integrate_periodic_2d(
        |t1, t2| v_multiplier(tau, symbol_a([t1, t2])) * (s1 * t1 + s2 * t2).cos(),
        &spec,
    )?;
    Ok(res.value / (4.0 * PI * PI))
}

/// Time panels `[0, min(tau, 1)]`, then `[2^k, 2^{k+1}]` clipped at `tau`.
fn time_panels(tau: f64) -> Vec<(f64, f64)> {
    let mut panels = vec![(0.0, tau.min(1.0))];
    let mut lo = 1.0;
    while lo < tau {
        let hi = (2.0 * lo).min(tau);
        panels.push((lo, hi));
        lo = hi;
    }
    panels
}

const TIME_RULE_ORDER: usize = 24;

/// `int_0^tau u^1(s, sigma) dsigma` for many sites at once.
fn time_integral_many(tau: f64, sites: &[[usize; 2]]) -> Result<Vec<f64>> {
    let n_max = sites.iter().map(|s| s[0].max(s[1])).max().unwrap_or(0);
    check_product_envelope(tau, n_max)?;
    let rule = GaussLegendre::new(TIME_RULE_ORDER);
    let nodes: Vec<(f64, f64)> = time_panels(tau)
        .into_iter()
        .flat_map(|(a, b)| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .map(move |(&x, &w)| (mid + half * x, w * half))
                .collect::<Vec<_>>()
        })
        .collect();
    let partial: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(sigma, w)| {
            let g = i_scaled_sequence_unchecked(n_max, 2.0 * sigma);
            sites.iter().map(|s| w * g[s[0]] * g[s[1]]).collect()
        })
        .collect();
    let mut out = vec![0.0; sites.len()];
    for row in partial {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    Ok(out)
}

/// Time-integral route for `v^eps(x, t) = int_0^t u^eps(x, t') dt'`, by
/// Gauss-Legendre on dyadic time panels of the product route.
pub fn v_time_integral(point: &LatticePoint, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let tau = t / (point.eps * point.eps);
    Ok(time_integral_many(tau, &[point.abs_s()])?[0])
}

/// `v^eps(x, t)`; the time-integral route inside the product envelope, the
/// spectral route beyond it.
pub fn v_exact(point: &LatticePoint, t: f64) -> Result<f64> {
    check_time(t)?;
    let tau = t / (point.eps * point.eps);
    let s = point.abs_s();
    if 2.0 * tau <= I_MAX_ARG && s[0].max(s[1]) <= I_MAX_ORDER as usize {
        v_time_integral(point, t)
    } else {
        v_spectral(point, t)
    }
}

/// Five-point `Delta_eps w` at the site `s` of a lattice with step `eps`.
pub fn discrete_laplacian<F>(field: F, s: [i64; 2], eps: f64) -> f64
where
    F: Fn([i64; 2]) -> f64,
{
    let [a, b] = s;
    let centre = field(s);
    (field([a + 1, b]) + field([a - 1, b]) + field([a, b + 1]) + field([a, b - 1]) - 4.0 * centre)
        / (eps * eps)
}

/// One row of a kernel sweep with both routes side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub s1: i64,
    pub s2: i64,
    pub eps: f64,
    pub t: f64,
    pub j: u32,
    pub value_spectral: f64,
    pub value_product: f64,
    pub abs_diff: f64,
}

/// Spectral trapezoid sums for many sites on one grid of `n x n` points,
/// `(2 pi)^{-2} sum w(A) cos(s1 theta1) cos(s2 theta2) h^2`.
///
/// The weight depends on `theta` only through `A`, which is even in each
/// component, so the sine parts of `cos(s . theta)` cancel on the symmetric
/// grid and the double sum factorises into two cosine transforms.
fn spectral_many_at<W>(weight: &W, n: usize, sites: &[[usize; 2]]) -> Vec<f64>
where
    W: Fn(f64) -> f64 + Sync,
{
    let h = 2.0 * PI / n as f64;
    let thetas: Vec<f64> = (0..n).map(|i| -PI + i as f64 * h).collect();
    let half_a: Vec<f64> = thetas
        .iter()
        .map(|&t| {
            let s = (0.5 * t).sin();
            4.0 * s * s
        })
        .collect();
    let s1_max = sites.iter().map(|s| s[0]).max().unwrap_or(0);
    // cos(k theta_i) for k = 0..=max order
    let k_max = sites.iter().map(|s| s[0].max(s[1])).max().unwrap_or(0);
    let cos_table: Vec<Vec<f64>> = (0..=k_max)
        .map(|k| thetas.iter().map(|&t| (k as f64 * t).cos()).collect())
        .collect();
    // partial[k1][i2] = sum_{i1} w(A(i1, i2)) cos(k1 theta_{i1})
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i2| {
            let w: Vec<f64> = (0..n).map(|i1| weight(half_a[i1] + half_a[i2])).collect();
            (0..=s1_max)
                .map(|k1| w.iter().zip(&cos_table[k1]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let norm = h * h / (4.0 * PI * PI);
    sites
        .iter()
        .map(|&[k1, k2]| {
            norm * (0..n)
                .map(|i2| columns[i2][k1] * cos_table[k2][i2])
                .sum::<f64>()
        })
        .collect()
}

/// Doubles the factorised spectral grid until every site is stable.
fn spectral_many<W>(weight: W, n0: usize, tol: f64, sites: &[[usize; 2]]) -> Result<Vec<f64>>
where
    W: Fn(f64) -> f64 + Sync,
{
    let mut n = n0;
    let mut prev = spectral_many_at(&weight, n, sites);
    loop {
        if 2 * n > quad::MAX_RESOLUTION {
            return Err(Error::Convergence {
                resolution: n,
                last: prev.first().copied().unwrap_or(f64::NAN),
                previous: f64::NAN,
            });
        }
        n *= 2;
        let cur = spectral_many_at(&weight, n, sites);
        let diff = cur
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < tol {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// `d^J u^eps / dt^J` at many sites for one `(t, eps, J)` by both routes.
pub fn u_sweep(sites: &[[i64; 2]], t: f64, eps: f64, j: u32) -> Result<Vec<KernelRow>> {
    let probe = KernelQuery::new(LatticePoint::new(0, 0, eps)?, t, j);
    probe.validate()?;
    let tau = probe.tau();
    let scale = probe.scale();
    let abs: Vec<[usize; 2]> = sites
        .iter()
        .map(|s| [s[0].unsigned_abs() as usize, s[1].unsigned_abs() as usize])
        .collect();
    let band = abs.iter().map(|s| s[0] + s[1]).max().unwrap_or(0) + 2 * j as usize;
    let (spectral, product) = if tau == 0.0 {
        let d: Vec<f64> = abs
            .iter()
            .map(|s| if *s == [0, 0] { scale } else { 0.0 })
            .collect();
        (d.clone(), d)
    } else {
        let ji = j as i32;
        let spectral = spectral_many(
            |a| (-tau * a).exp() * (-a).powi(ji),
            spectral_resolution(tau, band) / 2,
            SPECTRAL_TOL,
            &abs,
        )?;
        let n_max = abs.iter().map(|s| s[0].max(s[1])).max().unwrap_or(0) + j as usize;
        check_product_envelope(tau, n_max)?;
        let g = i_scaled_sequence_unchecked(n_max, 2.0 * tau);
        let product: Vec<f64> = abs
            .iter()
            .map(|&s| product_from_sequence(&g, s, j))
            .collect();
        (
            spectral.into_iter().map(|v| v * scale).collect(),
            product.into_iter().map(|v| v * scale).collect(),
        )
    };
    Ok(sites
        .iter()
        .zip(spectral.iter().zip(&product))
        .map(|(s, (&a, &b))| KernelRow {
            s1: s[0],
            s2: s[1],
            eps,
            t,
            j,
            value_spectral: a,
            value_product: b,
            abs_diff: (a - b).abs(),
        })
        .collect())
}

/// `v^eps(x, t)` at many sites by both routes. The `value_product` column
/// carries the time-integral route.
pub fn v_sweep(sites: &[[i64; 2]], t: f64, eps: f64) -> Result<Vec<KernelRow>> {
    LatticePoint::new(0, 0, eps)?;
    check_time(t)?;
    let tau = t / (eps * eps);
    let abs: Vec<[usize; 2]> = sites
        .iter()
        .map(|s| [s[0].unsigned_abs() as usize, s[1].unsigned_abs() as usize])
        .collect();
    let (spectral, integral) = if tau == 0.0 {
        (vec![0.0; sites.len()], vec![0.0; sites.len()])
    } else {
        let band = abs.iter().map(|s| s[0] + s[1]).max().unwrap_or(0);
        let spectral = spectral_many(
            |a| v_multiplier(tau, a),
            spectral_resolution(tau, band) / 2,
            SPECTRAL_TOL * tau.max(1.0),
            &abs,
        )?;
        (spectral, time_integral_many(tau, &abs)?)
    };
    Ok(sites
        .iter()
        .zip(spectral.iter().zip(&integral))
        .map(|(s, (&a, &b))| KernelRow {
            s1: s[0],
            s2: s[1],
            eps,
            t,
            j: 0,
            value_spectral: a,
            value_product: b,
            abs_diff: (a - b).abs(),
        })
        .collect())
}

/// `d^J u / dt^J` for a batch of independent queries, in parallel.
pub fn u_batch(queries: &[KernelQuery]) -> Vec<Result<f64>> {
    queries.par_iter().map(u_exact).collect()
}
