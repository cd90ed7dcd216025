//! Decay fits, numerical checks of the Bessel summation estimates, and the
//! bound dashboard.
//!
//! Every remainder estimate of the other modules is measured by a named
//! suite. A suite evaluates a residual on a grid of scales, fits its decay
//! or checks that a normalised statistic stays bounded, and reports the
//! measured constant together with a verdict. Suites are pure functions of
//! their configuration, run in parallel and are merged by name, so two runs
//! of the same configuration produce identical reports.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::expansion::{self, Coefficients, ExpansionOptions};
use crate::kernel::{self, KernelQuery, LatticePoint};
use crate::omega::{self, OmegaOptions};
use crate::quad::{self, GaussLegendre};
use crate::specfun::bessel::{
    bessel_j_sequence, j_leading, j_unchecked, shifted_cos, shifted_sin, SEQUENCE_MAX_ORDER,
};
use crate::specfun::{euler_gamma, euler_gamma_via_bessel};

/// Fewest positive samples accepted by [`fit_decay`].
pub const MIN_FIT_SAMPLES: usize = 4;
/// Smallest accepted `log2(max scale / min scale)`.
pub const MIN_FIT_OCTAVES: f64 = 3.0;
/// Goodness of fit required before a slope counts towards a verdict.
pub const MIN_R_SQUARED: f64 = 0.9;
/// Bound on the last normalised sample relative to the median.
pub const GROWTH_FACTOR: f64 = 1.5;
/// Tail bound used to truncate series over the order `n`.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Least-squares power law `residual ~ prefactor * scale^slope`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `(scale, residual)` pairs entering the fit.
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub prefactor: f64,
    /// Coefficient of determination of the log-log fit.
    pub r_squared: f64,
    /// Non-positive residuals dropped before fitting.
    pub filtered: usize,
}

impl DecayFit {
    /// The fit is good enough to support a verdict.
    pub fn reliable(&self) -> bool {
        self.r_squared >= MIN_R_SQUARED
    }

    /// Reliable and `|slope - target| <= tol`.
    pub fn matches(&self, target: f64, tol: f64) -> bool {
        self.reliable() && (self.slope - target).abs() <= tol
    }

    /// Reliable and `slope <= max`.
    pub fn at_most(&self, max: f64) -> bool {
        self.reliable() && self.slope <= max
    }
}

/// Fits `ln residual = ln prefactor + slope ln scale` by least squares.
///
/// Non-positive residuals are dropped and counted in `filtered`. The
/// remaining samples must number at least four and span three octaves.
pub fn fit_decay(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples
        .iter()
        .any(|&(s, r)| !(s > 0.0 && s.is_finite()) || !r.is_finite())
    {
        return Err(Error::Fit(
            "scales must be positive and finite, residuals finite".into(),
        ));
    }
    let kept: Vec<(f64, f64)> = samples.iter().copied().filter(|&(_, r)| r > 0.0).collect();
    let filtered = samples.len() - kept.len();
    if kept.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} positive samples ({filtered} filtered), need at least {MIN_FIT_SAMPLES}",
            kept.len()
        )));
    }
    let lo = kept.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = kept.iter().map(|p| p.0).fold(0.0, f64::max);
    let octaves = (hi / lo).log2();
    if octaves < MIN_FIT_OCTAVES {
        return Err(Error::Fit(format!(
            "samples span {octaves:.3} octaves, need at least {MIN_FIT_OCTAVES}"
        )));
    }
    let m = kept.len() as f64;
    let xs: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        samples: kept,
        slope,
        prefactor: intercept.exp(),
        r_squared,
        filtered,
    })
}

/// `true` when the last value is at most [`GROWTH_FACTOR`] times the median.
///
/// This is the operational form of "bounded with no growth trend" for
/// statistics that oscillate and are therefore not monotone.
pub fn bounded_no_growth(values: &[f64]) -> bool {
    let Some(&last) = values.last() else {
        return false;
    };
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    last <= GROWTH_FACTOR * median
}

/// `max |f|` over one period `[z, z + 2 pi]` sampled at `points` points: the
/// local amplitude of a residual oscillating like `cos(z + c)`.
pub fn period_envelope<F: Fn(f64) -> f64>(f: F, z: f64, points: usize) -> f64 {
    let m = points.max(1);
    (0..m)
        .map(|k| f(z + 2.0 * PI * k as f64 / m as f64).abs())
        .fold(0.0, f64::max)
}

/// Coefficients `alpha_n`, `n >= 1`.
pub type AlphaFn = Arc<dyn Fn(u32) -> f64 + Send + Sync>;
/// Profiles `A_n(rho)` or their derivatives on `[0, 1]`.
pub type ProfileFn = Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>;

/// The coefficient family of a summation check.
#[derive(Clone)]
pub enum SeriesFamily {
    Alpha(AlphaFn),
    Profiles {
        value: ProfileFn,
        derivative: ProfileFn,
        /// Largest index with a nonzero profile, when finite.
        support: Option<u32>,
    },
}

/// A coefficient family with its envelope constants `c0`, `c1` and the
/// finite exceptional set of indices with `A_n(0) != 0`.
#[derive(Clone)]
pub struct SeriesTestCase {
    pub name: String,
    pub family: SeriesFamily,
    pub c0: f64,
    pub c1: f64,
    pub n_set: Vec<u32>,
}

impl fmt::Debug for SeriesTestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.family {
            SeriesFamily::Alpha(_) => "alpha",
            SeriesFamily::Profiles { .. } => "profiles",
        };
        f.debug_struct("SeriesTestCase")
            .field("name", &self.name)
            .field("family", &kind)
            .field("c0", &self.c0)
            .field("c1", &self.c1)
            .field("n_set", &self.n_set)
            .finish()
    }
}

impl SeriesTestCase {
    /// `alpha_n = 1/n^5`.
    pub fn alpha_inverse_fifth() -> Self {
        Self::alpha("alpha_inverse_fifth", Arc::new(|n| 1.0 / (n as f64).powi(5)))
    }

    /// `alpha_n = 1` for `n = 1`, else 0.
    pub fn alpha_single() -> Self {
        Self::alpha("alpha_single", Arc::new(|n| if n == 1 { 1.0 } else { 0.0 }))
    }

    /// `alpha_n = (-1)^n / n^5`.
    pub fn alpha_alternating() -> Self {
        Self::alpha(
            "alpha_alternating",
            Arc::new(|n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign / (n as f64).powi(5)
            }),
        )
    }

    fn alpha(name: &str, alpha: AlphaFn) -> Self {
        Self {
            name: name.into(),
            family: SeriesFamily::Alpha(alpha),
            c0: 1.0,
            c1: 0.0,
            n_set: Vec::new(),
        }
    }

    /// `A_3(rho) = (1 - rho) e^{-rho} / 24`, all other profiles zero.
    pub fn a_third() -> Self {
        Self {
            name: "a_third".into(),
            family: SeriesFamily::Profiles {
                value: Arc::new(|n, rho| {
                    if n == 3 {
                        (1.0 - rho) * (-rho).exp() / 24.0
                    } else {
                        0.0
                    }
                }),
                derivative: Arc::new(|n, rho| {
                    if n == 3 {
                        (rho - 2.0) * (-rho).exp() / 24.0
                    } else {
                        0.0
                    }
                }),
                support: Some(3),
            },
            // sup |A_3| = 1/24 = c0/9, sup |A_3'| = 1/12 = c1/729
            c0: 9.0 / 24.0,
            c1: 729.0 / 12.0,
            n_set: vec![3],
        }
    }

    /// All profiles identically zero.
    pub fn a_zero() -> Self {
        Self {
            name: "a_zero".into(),
            family: SeriesFamily::Profiles {
                value: Arc::new(|_, _| 0.0),
                derivative: Arc::new(|_, _| 0.0),
                support: Some(0),
            },
            c0: 1.0,
            c1: 1.0,
            n_set: Vec::new(),
        }
    }

    /// `A_n(rho) = e^{-rho} / n^6` for `n = 1..8`.
    pub fn a_exp_sixth() -> Self {
        let f = |n: u32, rho: f64, sign: f64| {
            if (1..=8).contains(&n) {
                sign * (-rho).exp() / (n as f64).powi(6)
            } else {
                0.0
            }
        };
        Self {
            name: "a_exp_sixth".into(),
            family: SeriesFamily::Profiles {
                value: Arc::new(move |n, rho| f(n, rho, 1.0)),
                derivative: Arc::new(move |n, rho| f(n, rho, -1.0)),
                support: Some(8),
            },
            c0: 1.0,
            c1: 1.0,
            n_set: (1..=8).collect(),
        }
    }

    /// Number of terms kept when the largest scale is `scale`.
    ///
    /// For coefficients the tail is bounded by `c0 / (4 M^4)`; for profiles
    /// by `scale c1 / (5 M^5)`, since `|A_n| <= c1 rho / n^6` off the
    /// exceptional set and `|J_n| <= 1`.
    pub fn truncation(&self, scale: f64) -> usize {
        let m = match &self.family {
            SeriesFamily::Alpha(_) => (self.c0 / (4.0 * TRUNCATION_TOL)).powf(0.25).ceil() as usize,
            SeriesFamily::Profiles { support: Some(k), .. } => *k as usize,
            SeriesFamily::Profiles { support: None, .. } => {
                (scale.max(1.0) * self.c1 / (5.0 * TRUNCATION_TOL)).powf(0.2).ceil() as usize
            }
        };
        let exceptional = self.n_set.iter().copied().max().unwrap_or(0) as usize;
        m.max(exceptional).min(SEQUENCE_MAX_ORDER / 2)
    }

    /// Checks the stated envelopes on the indices the series will touch.
    pub fn check_envelopes(&self) -> Result<()> {
        if !(self.c0 > 0.0) || !(self.c1 >= 0.0) {
            return Err(Error::Precondition(format!(
                "{}: envelope constants must satisfy c0 > 0, c1 >= 0",
                self.name
            )));
        }
        let slack = 1.0 + 1e-12;
        match &self.family {
            SeriesFamily::Alpha(alpha) => {
                for n in 1..=2 * self.truncation(1.0) as u32 {
                    let a = alpha(n);
                    if !(a.abs() <= slack * self.c0 / (n as f64).powi(5)) {
                        return Err(Error::Precondition(format!(
                            "{}: |alpha_{n}| = {a:e} exceeds c0/n^5",
                            self.name
                        )));
                    }
                }
            }
            SeriesFamily::Profiles {
                value,
                derivative,
                support,
            } => {
                if !(self.c1 > 0.0) {
                    return Err(Error::Precondition(format!("{}: c1 must be > 0", self.name)));
                }
                let top = support.unwrap_or(64).max(1);
                for n in 1..=top {
                    let nf = n as f64;
                    for k in 0..=256 {
                        let rho = k as f64 / 256.0;
                        let a = value(n, rho);
                        let d = derivative(n, rho);
                        if !(a.abs() <= slack * self.c0 / (nf * nf)) {
                            return Err(Error::Precondition(format!(
                                "{}: |A_{n}({rho})| = {a:e} exceeds c0/n^2",
                                self.name
                            )));
                        }
                        if !(d.abs() <= slack * self.c1 / nf.powi(6)) {
                            return Err(Error::Precondition(format!(
                                "{}: |A_{n}'({rho})| = {d:e} exceeds c1/n^6",
                                self.name
                            )));
                        }
                    }
                    if !self.n_set.contains(&n) && value(n, 0.0) != 0.0 {
                        return Err(Error::Precondition(format!(
                            "{}: A_{n}(0) != 0 but {n} is not in the exceptional set",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `sum_{n in N} A_n(0)`; zero for coefficient families.
    pub fn limit(&self) -> f64 {
        match &self.family {
            SeriesFamily::Alpha(_) => 0.0,
            SeriesFamily::Profiles { value, .. } => {
                self.n_set.iter().fold(0.0, |acc, &n| acc + value(n, 0.0))
            }
        }
    }
}

fn alpha_of(case: &SeriesTestCase) -> Result<&AlphaFn> {
    match &case.family {
        SeriesFamily::Alpha(a) => Ok(a),
        SeriesFamily::Profiles { .. } => Err(Error::Precondition(format!(
            "{} is a profile family; a coefficient family is required",
            case.name
        ))),
    }
}

fn profiles_of(case: &SeriesTestCase) -> Result<&ProfileFn> {
    match &case.family {
        SeriesFamily::Profiles { value, .. } => Ok(value),
        SeriesFamily::Alpha(_) => Err(Error::Precondition(format!(
            "{} is a coefficient family; a profile family is required",
            case.name
        ))),
    }
}

/// `(sum alpha_n J_n(z), sum alpha_n leading_n(z))` over `n = 1..=m`, where
/// `leading_n(z) = (2/(pi z))^{1/2} cos(z - pi n/2 - pi/4)`.
pub fn alpha_sums(case: &SeriesTestCase, z: f64, m: usize) -> Result<(f64, f64)> {
    let alpha = alpha_of(case)?;
    let j = bessel_j_sequence(m, z)?;
    let mut sum = 0.0;
    let mut lead = 0.0;
    for (n, jn) in j.iter().enumerate().skip(1) {
        let a = alpha(n as u32);
        sum += a * jn;
        lead += a * j_leading(n, z);
    }
    Ok((sum, lead))
}

/// `sum_n alpha_n (J_n(z) - leading_n(z))`, summed termwise.
fn alpha_difference(alpha: &AlphaFn, z: f64, m: usize) -> f64 {
    let j = bessel_j_sequence(m, z).expect("order and argument checked by the caller");
    j.iter()
        .enumerate()
        .skip(1)
        .map(|(n, jn)| alpha(n as u32) * (jn - j_leading(n, z)))
        .sum()
}

/// `int_0^sigma sum_{n=1..=m} J_n(z) A_n(z/sigma) dz` by 20-point
/// Gauss-Legendre on unit panels.
pub fn profile_integral(case: &SeriesTestCase, sigma: f64, m: usize) -> Result<f64> {
    let value = profiles_of(case)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(20);
    let panels = sigma.ceil() as usize;
    let h = sigma / panels as f64;
    let parts: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let a = k as f64 * h;
            rule.integrate(a, a + h, |z| {
                let j = bessel_j_sequence(m, z).expect("order checked by truncation");
                (1..=m).map(|n| j[n] * value(n as u32, z / sigma)).sum()
            })
        })
        .collect();
    Ok(parts.iter().sum())
}

/// One scale of a summation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummationSample {
    /// `z` or `sigma`.
    pub scale: f64,
    /// The series or the integral of the series.
    pub value: f64,
    /// Leading cosine sum, or the limit `sum_{n in N} A_n(0)`.
    pub reference: f64,
    /// Envelope over one period of the difference, or of `value - limit`.
    pub deviation: f64,
    /// `z^{3/2} deviation` or `sigma^{1/2} deviation`.
    pub scaled: f64,
}

/// Outcome of [`check_summation_alpha`] or [`check_summation_a`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummationReport {
    pub case: String,
    pub truncation: usize,
    pub samples: Vec<SummationSample>,
    /// Decay fit of the deviation, when one can be formed.
    pub fit: Option<DecayFit>,
    /// `max scaled`: the measured constant.
    pub constant: f64,
    pub pass: bool,
}

fn check_scales(scales: &[f64], what: &str) -> Result<()> {
    if scales.len() < MIN_FIT_SAMPLES || scales.iter().any(|s| !(1e2..=1e4).contains(s)) {
        return Err(Error::Precondition(format!(
            "need at least {MIN_FIT_SAMPLES} {what} samples in [1e2, 1e4]"
        )));
    }
    Ok(())
}

/// Slope bound of the coefficient summation check.
pub const ALPHA_MAX_SLOPE: f64 = -1.5 + 0.15;

/// Measures `sum alpha_n J_n(z) - (2/(pi z))^{1/2} sum alpha_n cos(z - pi n/2 - pi/4)`.
///
/// The difference oscillates with period `2 pi`, so its size at `z` is taken
/// as the envelope over `[z, z + 2 pi]`. PASS iff the fitted slope is at most
/// `-3/2 + 0.15`.
pub fn check_summation_alpha(case: &SeriesTestCase, z_samples: &[f64]) -> Result<SummationReport> {
    check_scales(z_samples, "z")?;
    case.check_envelopes()?;
    let alpha = alpha_of(case)?;
    let m = case.truncation(1.0);
    let samples: Vec<SummationSample> = z_samples
        .par_iter()
        .map(|&z| {
            let (value, reference) = alpha_sums(case, z, m)?;
            let deviation = period_envelope(|w| alpha_difference(alpha, w, m), z, 128);
            Ok(SummationSample {
                scale: z,
                value,
                reference,
                deviation,
                scaled: z.powf(1.5) * deviation,
            })
        })
        .collect::<Result<_>>()?;
    let fit = fit_decay(&samples.iter().map(|s| (s.scale, s.deviation)).collect::<Vec<_>>()).ok();
    let pass = fit.as_ref().is_some_and(|f| f.at_most(ALPHA_MAX_SLOPE));
    Ok(SummationReport {
        case: case.name.clone(),
        truncation: m,
        constant: samples.iter().map(|s| s.scaled).fold(0.0, f64::max),
        samples,
        fit,
        pass,
    })
}

/// Measures `int_0^sigma sum J_n(z) A_n(z/sigma) dz - sum_{n in N} A_n(0)`.
///
/// As a function of `sigma` the deviation oscillates with period `2 pi`, so
/// its size is the envelope over `[sigma, sigma + 2 pi]` on 32 points. PASS
/// iff `sigma^{1/2}` times the envelope is bounded with no growth trend.
pub fn check_summation_a(case: &SeriesTestCase, sigma_samples: &[f64]) -> Result<SummationReport> {
    check_scales(sigma_samples, "sigma")?;
    case.check_envelopes()?;
    profiles_of(case)?;
    let limit = case.limit();
    let top = sigma_samples.iter().copied().fold(0.0, f64::max);
    let m = case.truncation(top);
    let samples: Vec<SummationSample> = sigma_samples
        .iter()
        .map(|&sigma| {
            let value = profile_integral(case, sigma, m)?;
            let shifted = (0..32)
                .into_par_iter()
                .map(|k| profile_integral(case, sigma + 2.0 * PI * k as f64 / 32.0, m))
                .collect::<Result<Vec<f64>>>()?;
            let deviation = shifted.iter().map(|v| (v - limit).abs()).fold(0.0, f64::max);
            Ok(SummationSample {
                scale: sigma,
                value,
                reference: limit,
                deviation,
                scaled: sigma.sqrt() * deviation,
            })
        })
        .collect::<Result<_>>()?;
    let scaled: Vec<f64> = samples.iter().map(|s| s.scaled).collect();
    let fit = fit_decay(&samples.iter().map(|s| (s.scale, s.deviation)).collect::<Vec<_>>()).ok();
    Ok(SummationReport {
        case: case.name.clone(),
        truncation: m,
        constant: scaled.iter().copied().fold(0.0, f64::max),
        pass: bounded_no_growth(&scaled),
        samples,
        fit,
    })
}

/// Residuals of a truncated expansion on a time grid and their decay fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residuals multiplied by the predicted decay.
    pub scaled: Vec<f64>,
    pub fit: Result<DecayFit>,
}

fn fit_residuals(times: &[f64], reports: Vec<expansion::ExpansionReport>) -> ExpansionFit {
    let residuals: Vec<f64> = reports.iter().map(|r| r.residual).collect();
    let scaled = reports.iter().map(|r| r.bound_check).collect();
    let samples: Vec<(f64, f64)> = times.iter().copied().zip(residuals.iter().map(|r| r.abs())).collect();
    ExpansionFit {
        times: times.to_vec(),
        fit: fit_decay(&samples),
        residuals,
        scaled,
    }
}

/// Residual of the `N`-term expansion of `d^J u` at the unit-lattice site `s`.
pub fn u_expansion_fit(
    s: [i64; 2],
    j: u32,
    n_terms: u32,
    times: &[f64],
    coefficients: Coefficients,
) -> Result<ExpansionFit> {
    let opts = ExpansionOptions {
        coefficients,
        ..ExpansionOptions::default()
    };
    let reports = times
        .par_iter()
        .map(|&t| {
            let q = KernelQuery::new(LatticePoint::unit(s[0], s[1]), t, j);
            expansion::u_expansion(&q, n_terms, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_residuals(times, reports))
}

/// Residual of the `N`-term expansion of `v` at the unit-lattice site `s != 0`.
pub fn v_expansion_fit(
    s: [i64; 2],
    n_terms: u32,
    times: &[f64],
    coefficients: Coefficients,
    include_omega: bool,
) -> Result<ExpansionFit> {
    let opts = ExpansionOptions {
        coefficients,
        include_omega,
        ..ExpansionOptions::default()
    };
    let point = LatticePoint::unit(s[0], s[1]);
    let reports = times
        .par_iter()
        .map(|&t| expansion::v_expansion_offorigin(&point, t, n_terms, &opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_residuals(times, reports))
}

/// Five doublings from `t_start`.
pub fn doubling_times(t_start: f64) -> Vec<f64> {
    (0..5).map(|k| t_start * f64::from(1u32 << k)).collect()
}

/// Start of the `u` time grid at site `s`: `max(10, 16 |s|^2)`, so that
/// `|x|^2 / t <= 1/16` on the whole grid.
pub fn u_time_start(s: [i64; 2]) -> f64 {
    let r2 = (s[0] * s[0] + s[1] * s[1]) as f64;
    (16.0 * r2).max(10.0)
}

/// Start of the `v` time grid off the origin.
pub const V_TIME_START: f64 = 200.0;

/// Maxima over a patch `|s|_inf <= radius` for one `(eps, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchRow {
    pub eps: f64,
    pub t: f64,
    /// `max |u_spectral - u_product|`
    pub u_route_diff: f64,
    /// `max |v_spectral - v_time_integral|`
    pub v_route_diff: f64,
    /// `max |du/dt - Delta_eps u|` over both routes.
    pub u_pde_residual: f64,
    /// `max |dv/dt - Delta_eps v - delta_eps|` over both routes.
    pub v_pde_residual: f64,
}

/// Route agreement and heat-equation residuals on the patch
/// `|s|_inf <= radius` for every `(eps, t)` pair with `t > 0`.
///
/// `dv/dt = u` because `v = int_0^t u`.
pub fn kernel_patch(radius: i64, times: &[f64], eps_values: &[f64]) -> Result<Vec<PatchRow>> {
    let outer = radius + 1;
    let sites: Vec<[i64; 2]> = (-outer..=outer)
        .flat_map(|a| (-outer..=outer).map(move |b| [a, b]))
        .collect();
    let mut rows = Vec::new();
    for &eps in eps_values {
        for &t in times {
            let u = kernel::u_sweep(&sites, t, eps, 0)?;
            let du = kernel::u_sweep(&sites, t, eps, 1)?;
            let v = kernel::v_sweep(&sites, t, eps)?;
            let index: HashMap<[i64; 2], usize> =
                sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let mut row = PatchRow {
                eps,
                t,
                u_route_diff: 0.0,
                v_route_diff: 0.0,
                u_pde_residual: 0.0,
                v_pde_residual: 0.0,
            };
            for (i, s) in sites.iter().enumerate() {
                if s[0].abs() > radius || s[1].abs() > radius {
                    continue;
                }
                row.u_route_diff = row.u_route_diff.max(u[i].abs_diff);
                row.v_route_diff = row.v_route_diff.max(v[i].abs_diff);
                let delta = if *s == [0, 0] { 1.0 / (eps * eps) } else { 0.0 };
                type Pick = fn(&kernel::KernelRow) -> f64;
                let routes: [Pick; 2] = [|r| r.value_spectral, |r| r.value_product];
                for pick in routes {
                    let lap_u = kernel::discrete_laplacian(|q| pick(&u[index[&q]]), *s, eps);
                    let lap_v = kernel::discrete_laplacian(|q| pick(&v[index[&q]]), *s, eps);
                    row.u_pde_residual = row.u_pde_residual.max((pick(&du[i]) - lap_u).abs());
                    row.v_pde_residual =
                        row.v_pde_residual.max((pick(&u[i]) - lap_v - delta).abs());
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// PASS, FAIL, or an evaluation error inside the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
        })
    }
}

/// Sample table of a suite, written as CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a header line and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of one dashboard suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    /// The inequality or identity under test.
    pub reference: String,
    /// How the verdict is decided.
    pub rule: String,
    pub verdict: Verdict,
    /// Measured constant of the estimate.
    pub constant: Option<f64>,
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    pub message: Option<String>,
    #[serde(skip)]
    pub table: Table,
}

/// Which suites to run and with which expansion coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DashboardConfig {
    pub suites: Vec<String>,
    pub coefficients: Coefficients,
}

impl Default for DashboardConfig {
    fn default() -> Self {
        Self::all()
    }
}

impl DashboardConfig {
    /// Every suite with the correct coefficients.
    pub fn all() -> Self {
        Self {
            suites: suite_names(),
            coefficients: Coefficients::default(),
        }
    }

    /// No suites at all.
    pub fn empty() -> Self {
        Self {
            suites: Vec::new(),
            coefficients: Coefficients::default(),
        }
    }

    /// The named suites only.
    pub fn only<S: AsRef<str>>(names: &[S]) -> Self {
        Self {
            suites: names.iter().map(|s| s.as_ref().to_string()).collect(),
            coefficients: Coefficients::default(),
        }
    }

    /// Rejects unknown suite names.
    pub fn validate(&self) -> Result<()> {
        let known = suite_names();
        for s in &self.suites {
            if !known.contains(s) {
                return Err(Error::Precondition(format!("unknown suite '{s}'")));
            }
        }
        Ok(())
    }
}

/// Report format version.
pub const REPORT_VERSION: u32 = 1;

/// All suite results, sorted by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub suites: Vec<SuiteResult>,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

impl Report {
    /// At least one suite ran and every suite passed.
    pub fn all_pass(&self) -> bool {
        !self.suites.is_empty() && self.failed == 0 && self.errors == 0
    }

    /// `report.json` contents: sorted keys, 17 significant digits.
    pub fn to_json(&self) -> String {
        to_json(self).expect("report serialises")
    }

    /// Writes `report.json` and one `<suite>.csv` per suite into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json())?;
        written.push(path);
        for suite in &self.suites {
            let path = dir.join(format!("{}.csv", suite.name));
            std::fs::write(&path, suite.table.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Round-trip float formatting with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON formatter: pretty layout, floats through [`format_float`].
struct FixedFloats(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with object keys sorted and floats in [`format_float`] form,
/// followed by a newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> std::result::Result<String, serde_json::Error> {
    // going through Value sorts the keys
    let tree = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        FixedFloats(serde_json::ser::PrettyFormatter::new()),
    );
    tree.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

#[derive(Clone, Copy)]
enum SuiteKind {
    KernelRoutes,
    KernelPde,
    UExpansion { s: [i64; 2], j: u32, n: u32 },
    VExpansion { s: [i64; 2], n: u32 },
    VOrigin,
    MutationH01,
    MutationOmega,
    OmegaFarField,
    OmegaRemainder,
    OmegaDiagonal,
    OmegaRoutes,
    ESpectrum,
    I3I4,
    BesselAbs,
    BesselIntegral,
    BesselUniform,
    BesselFixedOrder,
    BesselJ0,
    Gamma,
    SummationAlpha(fn() -> SeriesTestCase),
    SummationA(fn() -> SeriesTestCase),
}

struct SuiteSpec {
    name: String,
    reference: &'static str,
    rule: String,
    kind: SuiteKind,
}

const U_SITES: [[i64; 2]; 2] = [[0, 0], [3, 1]];
const V_SITES: [[i64; 2]; 2] = [[5, 0], [4, 3]];

fn site_tag(s: [i64; 2]) -> String {
    format!("s{}_{}", s[0], s[1])
}

fn catalog() -> Vec<SuiteSpec> {
    let mut out = Vec::new();
    let mut add = |name: String, reference: &'static str, rule: String, kind: SuiteKind| {
        out.push(SuiteSpec {
            name,
            reference,
            rule,
            kind,
        })
    };
    add(
        "kernel_routes".into(),
        "spectral and product routes of u, spectral and time-integral routes of v",
        "max |u diff| <= 1e-10 and max |v diff| <= 1e-8 on |s|_inf <= 20, t in {0.5, 2, 10, 50}, eps in {1, 0.5}".into(),
        SuiteKind::KernelRoutes,
    );
    add(
        "kernel_pde_residual".into(),
        "u_t = Delta_eps u and v_t = Delta_eps v + delta_eps",
        "max residual <= 1e-8 on the route-agreement patch".into(),
        SuiteKind::KernelPde,
    );
    for s in U_SITES {
        for j in 0..=1 {
            for n in 1..=3 {
                add(
                    format!("u_expansion_{}_j{j}_n{n}", site_tag(s)),
                    "|d^J u - sum_{n<N} eps^{2n} t^{-(n+1+J)} H_{Jn}(x/sqrt t)| <= C eps^{2N} t^{-(N+1+J)}",
                    format!(
                        "fitted slope = {} +- 0.15, r^2 >= 0.9, t = {} * 2^k, k = 0..4",
                        -((n + 1 + j) as f64),
                        u_time_start(s)
                    ),
                    SuiteKind::UExpansion { s, j, n },
                );
            }
        }
    }
    for s in V_SITES {
        for n in 1..=2 {
            add(
                format!("v_expansion_{}_n{n}", site_tag(s)),
                "|v - F_0 - Omega - sum_{1<=n<N} eps^{2n} t^{-n} F_n| <= C eps^{2N} t^{-N}",
                format!(
                    "fitted slope = {} +- 0.15, r^2 >= 0.9, t = {V_TIME_START} * 2^k, k = 0..4",
                    -(n as f64)
                ),
                SuiteKind::VExpansion { s, n },
            );
        }
    }
    add(
        "v_origin_log_law".into(),
        "v(0, t) = (1/4 pi) ln(t/eps^2) + S_0 + O(eps^2/t)",
        "|gap| <= 1e-4 at t = 1e4, two-point slope over t in {1e3, 1e4} = -1 +- 0.15, S_0 routes within 1e-8".into(),
        SuiteKind::VOrigin,
    );
    add(
        "mutation_h01".into(),
        "corrupted L_1 coefficient 1/24 instead of 2/24 must be detected",
        "u expansions N = 2, 3 at s = (0, 0), J = 0 fail their slope fits".into(),
        SuiteKind::MutationH01,
    );
    add(
        "mutation_omega".into(),
        "dropping Omega from the v expansion must be detected",
        "v expansion N = 1 at s = (5, 0) without Omega fails its slope fit".into(),
        SuiteKind::MutationOmega,
    );
    add(
        "omega_far_field".into(),
        "Omega(x) = cos(4 psi) / (24 pi r^2) + O(r^{-5/2})",
        "24 pi r^2 Omega / cos(4 psi) in [0.95, 1.05] at s = (40, 0), (30, 30)".into(),
        SuiteKind::OmegaFarField,
    );
    add(
        "omega_remainder_decay".into(),
        "|Omega - cos(4 psi) / (24 pi r^2)| <= C r^{-5/2}",
        "fitted slope <= -2.3 on psi = 0, r in {10, 20, 40, 80}".into(),
        SuiteKind::OmegaRemainder,
    );
    add(
        "omega_diagonal_bound".into(),
        "|Omega| r^{5/2} bounded where cos(4 psi) = 0",
        "r^{5/2} |Omega| bounded with no growth at the lattice sites closest to psi = pi/8".into(),
        SuiteKind::OmegaDiagonal,
    );
    add(
        "omega_routes".into(),
        "Omega by (I1 + I3 + I4) and by the direct representation with I2",
        "agreement within 1e-10".into(),
        SuiteKind::OmegaRoutes,
    );
    add(
        "e_spectrum".into(),
        "E(0, phi) = (cos 3 phi - cos 5 phi) / 24",
        "a_3 = 1/24, a_5 = -1/24, other |a_n|, |b_n| <= 1e-8 for n <= 16; branches agree within 1e-9".into(),
        SuiteKind::ESpectrum,
    );
    add(
        "i3_i4_cancellation".into(),
        "the r^{-3/2} oscillations of I3 and I4 cancel",
        "fitted slope of |I3 + I4| <= -1.8 and below the slopes of |I3| and |I4| on psi = 0".into(),
        SuiteKind::I3I4,
    );
    add(
        "bessel_abs_bound".into(),
        "|J_n(z)| <= 1",
        "max over n <= 20, z in [0, 1000] step 1/8".into(),
        SuiteKind::BesselAbs,
    );
    add(
        "bessel_unit_integral".into(),
        "int_0^inf J_n(z) dz = 1",
        "|integral - 1| <= 1e-3 for n <= 10".into(),
        SuiteKind::BesselIntegral,
    );
    add(
        "bessel_remainder_uniform".into(),
        "|R_n(z)| <= C n^3 z^{-3/2} for z > n^2",
        "max z^{3/2} |R_n| / n^3 over n <= 20, z in (n^2, 10 n^2] changes by <= 2% when the grid is doubled".into(),
        SuiteKind::BesselUniform,
    );
    add(
        "bessel_remainder_fixed_order".into(),
        "|R_n(z)| <= C_n z^{-3/2} for z >= 1",
        "octave maxima of z^{3/2} |R_n| bounded with no growth for n <= 10".into(),
        SuiteKind::BesselFixedOrder,
    );
    add(
        "bessel_j0_two_term".into(),
        "J_0 minus its two-term asymptotic form is O(z^{-5/2})",
        "fitted slope of the period envelope <= -2.3".into(),
        SuiteKind::BesselJ0,
    );
    add(
        "gamma_identity".into(),
        "exponential and Bessel integral forms of the Euler-Mascheroni constant",
        "agreement within 1e-8".into(),
        SuiteKind::Gamma,
    );
    let alpha_rule = "fitted slope of the period envelope <= -1.35, z in {100, 400, 1600, 6400}";
    let a_rule = "sigma^{1/2} |deviation| bounded with no growth, sigma = 100 * 2^k, k = 0..6";
    let alpha_ref = "sum alpha_n J_n(z) - (2/(pi z))^{1/2} sum alpha_n cos(z - pi n/2 - pi/4) = O(z^{-3/2})";
    let a_ref = "|int_0^sigma sum J_n(z) A_n(z/sigma) dz - sum_{n in N} A_n(0)| <= c sigma^{-1/2}";
    let alphas: [fn() -> SeriesTestCase; 3] = [
        SeriesTestCase::alpha_inverse_fifth,
        SeriesTestCase::alpha_single,
        SeriesTestCase::alpha_alternating,
    ];
    for f in alphas {
        add(format!("summation_{}", f().name), alpha_ref, alpha_rule.into(), SuiteKind::SummationAlpha(f));
    }
    let profiles: [fn() -> SeriesTestCase; 3] = [
        SeriesTestCase::a_third,
        SeriesTestCase::a_zero,
        SeriesTestCase::a_exp_sixth,
    ];
    for f in profiles {
        add(format!("summation_{}", f().name), a_ref, a_rule.into(), SuiteKind::SummationA(f));
    }
    out
}

/// Names of every dashboard suite, sorted.
pub fn suite_names() -> Vec<String> {
    let mut names: Vec<String> = catalog().into_iter().map(|s| s.name).collect();
    names.sort();
    names
}

#[derive(Default)]
struct Outcome {
    pass: bool,
    constant: Option<f64>,
    slope: Option<f64>,
    r_squared: Option<f64>,
    message: Option<String>,
    table: Table,
}

impl Outcome {
    fn with_fit(mut self, fit: &Result<DecayFit>) -> Self {
        match fit {
            Ok(f) => {
                self.slope = Some(f.slope);
                self.r_squared = Some(f.r_squared);
                if f.filtered > 0 {
                    self.message = Some(format!("{} non-positive residuals filtered", f.filtered));
                }
            }
            Err(e) => self.message = Some(e.to_string()),
        }
        self
    }
}

/// Kernel patch of the route and PDE suites.
pub const PATCH_RADIUS: i64 = 20;
pub const PATCH_TIMES: [f64; 4] = [0.5, 2.0, 10.0, 50.0];
pub const PATCH_EPS: [f64; 2] = [1.0, 0.5];

fn patch_outcome(pde: bool) -> Result<Outcome> {
    let rows = kernel_patch(PATCH_RADIUS, &PATCH_TIMES, &PATCH_EPS)?;
    let mut table = Table::new(&[
        "eps",
        "t",
        "u_route_diff",
        "v_route_diff",
        "u_pde_residual",
        "v_pde_residual",
    ]);
    for r in &rows {
        table.push(vec![r.eps, r.t, r.u_route_diff, r.v_route_diff, r.u_pde_residual, r.v_pde_residual]);
    }
    let max = |f: fn(&PatchRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (du, dv) = if pde {
        (max(|r| r.u_pde_residual), max(|r| r.v_pde_residual))
    } else {
        (max(|r| r.u_route_diff), max(|r| r.v_route_diff))
    };
    let (tu, tv) = if pde { (1e-8, 1e-8) } else { (1e-10, 1e-8) };
    Ok(Outcome {
        pass: du <= tu && dv <= tv,
        constant: Some(du.max(dv)),
        message: Some(format!("max u: {du:e}, max v: {dv:e}")),
        table,
        ..Outcome::default()
    })
}

fn expansion_table(fit: &ExpansionFit) -> Table {
    let mut table = Table::new(&["t", "residual", "scaled_residual"]);
    for i in 0..fit.times.len() {
        table.push(vec![fit.times[i], fit.residuals[i], fit.scaled[i]]);
    }
    table
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn slope_matches(fit: &ExpansionFit, target: f64) -> bool {
    fit.fit.as_ref().is_ok_and(|f| f.matches(target, 0.15))
}

fn run_kind(kind: SuiteKind, config: &DashboardConfig) -> Result<Outcome> {
    match kind {
        SuiteKind::KernelRoutes => patch_outcome(false),
        SuiteKind::KernelPde => patch_outcome(true),
        SuiteKind::UExpansion { s, j, n } => {
            let fit = u_expansion_fit(s, j, n, &doubling_times(u_time_start(s)), config.coefficients)?;
            Ok(Outcome {
                pass: slope_matches(&fit, -((n + 1 + j) as f64)),
                constant: Some(max_abs(&fit.scaled)),
                table: expansion_table(&fit),
                ..Outcome::default()
            }
            .with_fit(&fit.fit))
        }
        SuiteKind::VExpansion { s, n } => {
            let fit = v_expansion_fit(s, n, &doubling_times(V_TIME_START), config.coefficients, true)?;
            Ok(Outcome {
                pass: slope_matches(&fit, -(n as f64)),
                constant: Some(max_abs(&fit.scaled)),
                table: expansion_table(&fit),
                ..Outcome::default()
            }
            .with_fit(&fit.fit))
        }
        SuiteKind::VOrigin => {
            let opts = ExpansionOptions {
                coefficients: config.coefficients,
                ..ExpansionOptions::default()
            };
            let times = [1e3, 1e4];
            let reports = times
                .iter()
                .map(|&t| expansion::v_expansion_origin(t, 1.0, 1, &opts))
                .collect::<Result<Vec<_>>>()?;
            let gaps: Vec<f64> = reports.iter().map(|r| r.residual).collect();
            let slope = (gaps[1].abs() / gaps[0].abs()).ln() / (times[1] / times[0]).ln();
            let b = constants::s0_quadrature()?;
            let routes = (b.total - b.total_gaussian_route).abs();
            let mut table = Table::new(&["t", "exact", "log_law", "gap"]);
            for r in &reports {
                table.push(vec![r.t, r.exact, r.value, r.residual]);
            }
            Ok(Outcome {
                pass: gaps[1].abs() <= 1e-4 && (slope + 1.0).abs() <= 0.15 && routes <= 1e-8,
                constant: Some(gaps[1].abs() * times[1]),
                slope: Some(slope),
                message: Some(format!("S_0 = {:.17e}, route difference {routes:e}", b.total)),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::MutationH01 => {
            let bad = Coefficients {
                h01: 1.0 / 24.0,
                ..Coefficients::default()
            };
            let times = doubling_times(u_time_start([0, 0]));
            let n2 = u_expansion_fit([0, 0], 0, 2, &times, bad)?;
            let n3 = u_expansion_fit([0, 0], 0, 3, &times, bad)?;
            let mut table = Table::new(&["t", "residual_n2", "residual_n3"]);
            for (i, &t) in times.iter().enumerate() {
                table.push(vec![t, n2.residuals[i], n3.residuals[i]]);
            }
            let caught = !slope_matches(&n2, -3.0) && !slope_matches(&n3, -4.0);
            Ok(Outcome {
                pass: caught,
                message: Some(if caught {
                    "corruption detected".into()
                } else {
                    "corruption not detected".into()
                }),
                table,
                ..Outcome::default()
            }
            .with_fit(&n2.fit))
        }
        SuiteKind::MutationOmega => {
            let fit = v_expansion_fit([5, 0], 1, &doubling_times(V_TIME_START), config.coefficients, false)?;
            let caught = !slope_matches(&fit, -1.0);
            Ok(Outcome {
                pass: caught,
                table: expansion_table(&fit),
                ..Outcome::default()
            }
            .with_fit(&fit.fit))
        }
        SuiteKind::OmegaFarField => {
            let sites = [[40i64, 0], [30, 30]];
            let ratios = sites
                .par_iter()
                .map(|s| {
                    let a = omega::omega_asymptotic(&LatticePoint::unit(s[0], s[1]))?;
                    Ok((a.r, a.psi, a.omega, a.omega / a.leading))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["r", "psi", "omega", "ratio"]);
            for &(r, psi, om, q) in &ratios {
                table.push(vec![r, psi, om, q]);
            }
            Ok(Outcome {
                pass: ratios.iter().all(|x| (0.95..=1.05).contains(&x.3)),
                constant: Some(ratios.iter().map(|x| (x.3 - 1.0).abs()).fold(0.0, f64::max)),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::OmegaRemainder => {
            let radii = [10i64, 20, 40, 80];
            let rows = radii
                .par_iter()
                .map(|&r| omega::omega_asymptotic(&LatticePoint::unit(r, 0)))
                .collect::<Result<Vec<_>>>()?;
            let fit = fit_decay(&rows.iter().map(|a| (a.r, a.residual.abs())).collect::<Vec<_>>());
            let mut table = Table::new(&["r", "omega", "leading", "residual", "scaled_residual"]);
            for a in &rows {
                table.push(vec![a.r, a.omega, a.leading, a.residual, a.residual_order_check]);
            }
            Ok(Outcome {
                pass: fit.as_ref().is_ok_and(|f| f.at_most(-2.5 + 0.2)),
                constant: Some(rows.iter().map(|a| a.residual_order_check).fold(0.0, f64::max)),
                table,
                ..Outcome::default()
            }
            .with_fit(&fit))
        }
        SuiteKind::OmegaDiagonal => {
            // best rational approximations of tan(pi/8) = sqrt 2 - 1
            let sites = [[5i64, 2], [12, 5], [29, 12], [70, 29]];
            let rows = sites
                .par_iter()
                .map(|s| omega::omega_asymptotic(&LatticePoint::unit(s[0], s[1])))
                .collect::<Result<Vec<_>>>()?;
            let scaled: Vec<f64> = rows.iter().map(|a| a.r.powf(2.5) * a.omega.abs()).collect();
            let mut table = Table::new(&["r", "psi", "omega", "scaled_omega"]);
            for (a, s) in rows.iter().zip(&scaled) {
                table.push(vec![a.r, a.psi, a.omega, *s]);
            }
            Ok(Outcome {
                pass: bounded_no_growth(&scaled),
                constant: Some(scaled.iter().copied().fold(0.0, f64::max)),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::OmegaRoutes => {
            let sites = [[5i64, 0], [4, 3], [10, 0], [7, 7]];
            let opts = OmegaOptions {
                cross_check: true,
                ..OmegaOptions::default()
            };
            let rows = sites
                .par_iter()
                .map(|s| omega::omega_exact(&LatticePoint::unit(s[0], s[1]), &opts))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["r", "psi", "omega", "omega_direct", "difference"]);
            let mut worst: f64 = 0.0;
            for d in &rows {
                let direct = d.omega_direct.unwrap_or(f64::NAN);
                let diff = (d.omega - direct).abs();
                worst = worst.max(if diff.is_nan() { f64::INFINITY } else { diff });
                table.push(vec![d.r, d.psi, d.omega, direct, diff]);
            }
            Ok(Outcome {
                pass: worst <= 1e-10,
                constant: Some(worst),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::ESpectrum => {
            let mut table = Table::new(&["rho", "n", "a_n", "b_n", "expected_a_n"]);
            let mut worst: f64 = 0.0;
            for rho in [0.0, 1e-4] {
                let spec = omega::angular_spectrum(rho, 16)?;
                for n in 0..=16 {
                    let expected = match n {
                        3 => 1.0 / 24.0,
                        5 => -1.0 / 24.0,
                        _ => 0.0,
                    };
                    worst = worst.max((spec.a[n] - expected).abs()).max(spec.b[n].abs());
                    table.push(vec![rho, n as f64, spec.a[n], spec.b[n], expected]);
                }
            }
            let switch = omega::E_SERIES_SWITCH;
            let mut branch_gap: f64 = 0.0;
            for k in 0..64 {
                let phi = -PI + 2.0 * PI * k as f64 / 64.0;
                let (series, direct) = omega::e_branches(switch, phi)?;
                branch_gap = branch_gap.max((series - direct).abs());
                let near = omega::e_function(1e-6, phi)?;
                branch_gap = branch_gap.max((near - omega::e_limit(phi)).abs());
            }
            Ok(Outcome {
                pass: worst <= 1e-8 && branch_gap <= 1e-9,
                constant: Some(worst),
                message: Some(format!("branch gap {branch_gap:e}")),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::I3I4 => {
            let radii = [10.0, 20.0, 40.0, 80.0];
            let rows = radii
                .par_iter()
                .map(|&r| Ok((r, omega::i3(r, 0.0, omega::DEFAULT_TOLERANCE)?.value, omega::i4(r)?)))
                .collect::<Result<Vec<_>>>()?;
            let fit_of = |f: fn(&(f64, f64, f64)) -> f64| {
                fit_decay(&rows.iter().map(|x| (x.0, f(x).abs())).collect::<Vec<_>>())
            };
            let f3 = fit_of(|x| x.1);
            let f4 = fit_of(|x| x.2);
            let fs = fit_of(|x| x.1 + x.2);
            let mut table = Table::new(&["r", "i3", "i4", "sum"]);
            for x in &rows {
                table.push(vec![x.0, x.1, x.2, x.1 + x.2]);
            }
            let pass = match (&f3, &f4, &fs) {
                (Ok(a), Ok(b), Ok(s)) => s.at_most(-2.0 + 0.2) && s.slope < a.slope && s.slope < b.slope,
                _ => false,
            };
            let mut out = Outcome {
                pass,
                table,
                ..Outcome::default()
            }
            .with_fit(&fs);
            if let (Ok(a), Ok(b)) = (&f3, &f4) {
                out.message = Some(format!("slope I3 {:.4}, slope I4 {:.4}", a.slope, b.slope));
            }
            Ok(out)
        }
        SuiteKind::BesselAbs => {
            let mut table = Table::new(&["n", "max_abs_j"]);
            let mut worst: f64 = 0.0;
            for n in 0..=20u32 {
                let m = (0..=8000)
                    .map(|k| j_unchecked(n, k as f64 / 8.0).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(m);
                table.push(vec![n as f64, m]);
            }
            Ok(Outcome {
                pass: worst <= 1.0,
                constant: Some(worst),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::BesselIntegral => {
            let mut table = Table::new(&["n", "integral"]);
            let mut worst: f64 = 0.0;
            for n in 0..=10u32 {
                let v = quad::bessel_integral_to_infinity(n, 0.0, 0.0)?;
                worst = worst.max((v - 1.0).abs());
                table.push(vec![n as f64, v]);
            }
            Ok(Outcome {
                pass: worst <= 1e-3,
                constant: Some(worst),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::BesselUniform => {
            let c_at = |n: u32, m: usize| {
                let nf = n as f64;
                let lo = nf * nf;
                (1..=m)
                    .map(|k| {
                        let z = lo + 9.0 * lo * k as f64 / m as f64;
                        z.powf(1.5) * (j_unchecked(n, z) - j_leading(n as usize, z)).abs() / (nf * nf * nf)
                    })
                    .fold(0.0, f64::max)
            };
            let mut table = Table::new(&["n", "constant_coarse", "constant_fine"]);
            let (mut coarse, mut fine): (f64, f64) = (0.0, 0.0);
            for n in 1..=20u32 {
                let a = c_at(n, 2000);
                let b = c_at(n, 4000);
                coarse = coarse.max(a);
                fine = fine.max(b);
                table.push(vec![n as f64, a, b]);
            }
            Ok(Outcome {
                pass: (fine - coarse).abs() <= 0.02 * fine && fine.is_finite(),
                constant: Some(fine),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::BesselFixedOrder => {
            let mut table = Table::new(&["n", "octave_start", "max_scaled_remainder"]);
            let mut all = true;
            let mut worst: f64 = 0.0;
            for n in 0..=10u32 {
                let first = ((n * n).max(1) as f64).log2().floor() as i32;
                let maxima: Vec<f64> = (first..first + 9)
                    .map(|k| {
                        let a = 2f64.powi(k);
                        let m = (0..=512)
                            .map(|i| {
                                let z = a * (1.0 + i as f64 / 512.0);
                                z.powf(1.5) * (j_unchecked(n, z) - j_leading(n as usize, z)).abs()
                            })
                            .fold(0.0, f64::max);
                        table.push(vec![n as f64, a, m]);
                        m
                    })
                    .collect();
                worst = worst.max(maxima.iter().copied().fold(0.0, f64::max));
                all &= bounded_no_growth(&maxima);
            }
            Ok(Outcome {
                pass: all,
                constant: Some(worst),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::BesselJ0 => {
            let c = (2.0 / PI).sqrt();
            let two_term =
                |z: f64| c * z.powf(-0.5) * shifted_cos(z, 0) + c / 8.0 * z.powf(-1.5) * shifted_sin(z, 0);
            let zs = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0];
            let env: Vec<(f64, f64)> = zs
                .iter()
                .map(|&z| (z, period_envelope(|w| j_unchecked(0, w) - two_term(w), z, 128)))
                .collect();
            let fit = fit_decay(&env);
            let mut table = Table::new(&["z", "envelope", "scaled_envelope"]);
            for &(z, e) in &env {
                table.push(vec![z, e, z.powf(2.5) * e]);
            }
            Ok(Outcome {
                pass: fit.as_ref().is_ok_and(|f| f.at_most(-2.5 + 0.2)),
                constant: Some(env.iter().map(|&(z, e)| z.powf(2.5) * e).fold(0.0, f64::max)),
                table,
                ..Outcome::default()
            }
            .with_fit(&fit))
        }
        SuiteKind::Gamma => {
            let a = euler_gamma();
            let b = euler_gamma_via_bessel();
            let mut table = Table::new(&["exponential_route", "bessel_route", "difference"]);
            table.push(vec![a, b, (a - b).abs()]);
            Ok(Outcome {
                pass: (a - b).abs() <= 1e-8,
                constant: Some((a - b).abs()),
                table,
                ..Outcome::default()
            })
        }
        SuiteKind::SummationAlpha(make) => {
            let rep = check_summation_alpha(&make(), &ALPHA_Z_SAMPLES)?;
            Ok(summation_outcome(&rep))
        }
        SuiteKind::SummationA(make) => {
            let rep = check_summation_a(&make(), &A_SIGMA_SAMPLES)?;
            Ok(summation_outcome(&rep))
        }
    }
}

/// Default `z` samples of the coefficient summation suites.
pub const ALPHA_Z_SAMPLES: [f64; 4] = [100.0, 400.0, 1600.0, 6400.0];
/// Default `sigma` samples of the profile summation suites.
pub const A_SIGMA_SAMPLES: [f64; 7] = [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0];

fn summation_outcome(rep: &SummationReport) -> Outcome {
    let mut table = Table::new(&["scale", "value", "reference", "deviation", "scaled_deviation"]);
    for s in &rep.samples {
        table.push(vec![s.scale, s.value, s.reference, s.deviation, s.scaled]);
    }
    Outcome {
        pass: rep.pass,
        constant: Some(rep.constant),
        slope: rep.fit.as_ref().map(|f| f.slope),
        r_squared: rep.fit.as_ref().map(|f| f.r_squared),
        message: Some(format!("truncation {}", rep.truncation)),
        table,
    }
}

fn run_spec(spec: &SuiteSpec, config: &DashboardConfig) -> SuiteResult {
    let outcome = catch_unwind(AssertUnwindSafe(|| run_kind(spec.kind, config)))
        .unwrap_or_else(|_| Err(Error::Precondition("suite panicked".into())));
    let base = SuiteResult {
        name: spec.name.clone(),
        reference: spec.reference.into(),
        rule: spec.rule.clone(),
        verdict: Verdict::Error,
        constant: None,
        slope: None,
        r_squared: None,
        message: None,
        table: Table::default(),
    };
    match outcome {
        Ok(o) => SuiteResult {
            verdict: if o.pass { Verdict::Pass } else { Verdict::Fail },
            constant: o.constant,
            slope: o.slope,
            r_squared: o.r_squared,
            message: o.message,
            table: o.table,
            ..base
        },
        Err(e) => SuiteResult {
            message: Some(e.to_string()),
            ..base
        },
    }
}

/// Runs one named suite.
pub fn run_suite(name: &str, config: &DashboardConfig) -> Result<SuiteResult> {
    let spec = catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Precondition(format!("unknown suite '{name}'")))?;
    Ok(run_spec(&spec, config))
}

/// Runs the configured suites in parallel and merges them by name.
///
/// Suite failures and evaluation errors are recorded in the report; the
/// dashboard itself only fails on an invalid configuration.
pub fn bound_dashboard(config: &DashboardConfig) -> Result<Report> {
    config.validate()?;
    let specs: Vec<SuiteSpec> = catalog()
        .into_iter()
        .filter(|s| config.suites.contains(&s.name))
        .collect();
    let mut suites: Vec<SuiteResult> = specs.par_iter().map(|s| run_spec(s, config)).collect();
    suites.sort_by(|a, b| a.name.cmp(&b.name));
    let count = |v: Verdict| suites.iter().filter(|s| s.verdict == v).count();
    Ok(Report {
        version: REPORT_VERSION,
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        errors: count(Verdict::Error),
        suites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let samples: Vec<(f64, f64)> = (0..6).map(|k| {
            let t = 10.0 * 2f64.powi(k);
            (t, 3.0 / (t * t))
        }).collect();
        let f = fit_decay(&samples).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_preconditions() {
        let narrow: Vec<(f64, f64)> = (0..6).map(|k| (10.0 + k as f64, 1.0)).collect();
        assert!(matches!(fit_decay(&narrow), Err(Error::Fit(_))));
        let signs = [(1.0, 1.0), (2.0, -1.0), (4.0, 0.5), (8.0, 0.0), (16.0, 0.1)];
        assert!(fit_decay(&signs).is_err());
        let mixed = [(1.0, 1.0), (2.0, -1.0), (4.0, 0.25), (8.0, 0.125), (16.0, 0.0625)];
        assert_eq!(fit_decay(&mixed).unwrap().filtered, 1);
    }

    #[test]
    fn growth_rule() {
        assert!(bounded_no_growth(&[1.0, 0.5, 1.2, 0.9]));
        assert!(!bounded_no_growth(&[1.0, 1.0, 1.0, 2.0]));
        assert!(bounded_no_growth(&[0.0, 0.0, 0.0]));
        assert!(!bounded_no_growth(&[]));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_keys_sorted_and_fixed_floats() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: u32,
        }
        let out = to_json(&S { zeta: 0.5, alpha: 2 }).unwrap();
        assert!(out.find("alpha").unwrap() < out.find("zeta").unwrap());
        assert!(out.contains("5.0000000000000000e-1"));
        let back: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(back["zeta"].as_f64(), Some(0.5));
    }

    #[test]
    fn presets_satisfy_their_envelopes() {
        for c in [
            SeriesTestCase::alpha_inverse_fifth(),
            SeriesTestCase::alpha_single(),
            SeriesTestCase::alpha_alternating(),
            SeriesTestCase::a_third(),
            SeriesTestCase::a_zero(),
            SeriesTestCase::a_exp_sixth(),
        ] {
            c.check_envelopes().unwrap();
        }
    }

    #[test]
    fn envelope_violation_is_a_precondition_error() {
        let mut c = SeriesTestCase::alpha_inverse_fifth();
        c.family = SeriesFamily::Alpha(Arc::new(|n| 1.0 / (n as f64).powi(3)));
        assert!(matches!(
            check_summation_alpha(&c, &ALPHA_Z_SAMPLES),
            Err(Error::Precondition(_))
        ));
        let mut a = SeriesTestCase::a_third();
        a.n_set.clear();
        assert!(matches!(a.check_envelopes(), Err(Error::Precondition(_))));
    }

    #[test]
    fn wrong_family_kind_rejected() {
        let a = SeriesTestCase::a_third();
        assert!(check_summation_alpha(&a, &ALPHA_Z_SAMPLES).is_err());
        assert!(check_summation_a(&SeriesTestCase::alpha_single(), &A_SIGMA_SAMPLES).is_err());
    }

    #[test]
    fn zero_profiles_integrate_to_zero() {
        let rep = check_summation_a(&SeriesTestCase::a_zero(), &A_SIGMA_SAMPLES[..4]).unwrap();
        assert!(rep.samples.iter().all(|s| s.value == 0.0 && s.deviation == 0.0));
        assert!(rep.pass);
    }

    #[test]
    fn single_coefficient_is_the_bessel_remainder() {
        let c = SeriesTestCase::alpha_single();
        let (sum, lead) = alpha_sums(&c, 400.0, c.truncation(1.0)).unwrap();
        assert!((sum - j_unchecked(1, 400.0)).abs() < 1e-15);
        assert!((lead - j_leading(1, 400.0)).abs() < 1e-15);
    }

    #[test]
    fn suite_names_unique_and_config_checked() {
        let names = suite_names();
        let mut d = names.clone();
        d.dedup();
        assert_eq!(d.len(), names.len());
        assert!(DashboardConfig::only(&["nope"]).validate().is_err());
        let rep = bound_dashboard(&DashboardConfig::empty()).unwrap();
        assert!(rep.suites.is_empty());
        assert!(!rep.all_pass());
    }

    #[test]
    fn gamma_suite_passes() {
        let r = run_suite("gamma_identity", &DashboardConfig::all()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.table.rows.len(), 1);
    }
}
