//! Integer-order Bessel functions of the first kind and exponentially scaled
//! modified Bessel functions.
//!
//! `J_n` is evaluated by the ascending series for `z <= 1`, by the Hankel
//! asymptotic series once `z >= max(50, n^2)`, and by Miller's backward
//! recurrence in between. The recurrence is normalised with the sum-of-squares
//! identity `J_0^2 + 2 sum J_k^2 = 1`, whose terms are all positive, and the sign
//! is taken from the even-order sum `J_0 + 2 sum J_{2k} = 1`.
//!
//! `I_n` is only exposed in the scaled form `e^{-z} I_n(z)`. Backward
//! recurrence is stable for `I_n` everywhere and the normalising identity
//! `I_0 + 2 sum I_k = e^z` has positive terms, so the scaled values carry
//! relative accuracy close to machine precision.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const J_MAX_ORDER: u32 = 200;
/// Largest argument accepted by [`bessel_j`].
pub const J_MAX_ARG: f64 = 1.0e6;
/// Largest order accepted by [`bessel_i_scaled`].
pub const I_MAX_ORDER: u32 = 400;
/// Largest argument accepted by [`bessel_i_scaled`].
pub const I_MAX_ARG: f64 = 1.0e4;
/// Largest order accepted by [`bessel_j_sequence`].
pub const SEQUENCE_MAX_ORDER: usize = 4096;

const RESCALE_ABOVE: f64 = 1.0e150;
const RESCALE_BY: f64 = 1.0e-150;

/// Leading cosine form of `J_n` together with the remainder `R_n(z)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BesselAsymptotic {
    pub order: u32,
    pub z: f64,
    /// `(2/(pi z))^{1/2} cos(z - pi n/2 - pi/4)`
    pub leading: f64,
    /// `J_n(z) - leading`
    pub remainder: f64,
}

fn check_j(n: u32, z: f64) -> Result<()> {
    if n > J_MAX_ORDER {
        return Err(Error::Range {
            name: "n",
            value: n as f64,
            limit: "n <= 200",
        });
    }
    if !(0.0..=J_MAX_ARG).contains(&z) {
        return Err(Error::Range {
            name: "z",
            value: z,
            limit: "0 <= z <= 1e6",
        });
    }
    Ok(())
}

/// Bessel function of the first kind `J_n(z)` for integer `n >= 0`, `z >= 0`.
///
/// Absolute accuracy is better than `1e-12` for `n <= 200`, `z <= 1e6`.
pub fn bessel_j(n: u32, z: f64) -> Result<f64> {
    check_j(n, z)?;
    Ok(j_unchecked(n, z))
}

/// Splits `J_n(z)` into its leading cosine form and the remainder.
///
/// The remainder is obtained by subtraction, so `leading + remainder`
/// reproduces [`bessel_j`] up to a single rounding.
pub fn bessel_j_asymptotic(n: u32, z: f64) -> Result<BesselAsymptotic> {
    check_j(n, z)?;
    if z < 1.0 {
        return Err(Error::Domain(format!(
            "asymptotic split of J_n needs z >= 1, got {z}"
        )));
    }
    let leading = j_leading(n as usize, z);
    Ok(BesselAsymptotic {
        order: n,
        z,
        leading,
        remainder: j_unchecked(n, z) - leading,
    })
}

/// `(2/(pi z))^{1/2} cos(z - pi n/2 - pi/4)` with the phase reduced exactly.
pub(crate) fn j_leading(n: usize, z: f64) -> f64 {
    (2.0 / (PI * z)).sqrt() * shifted_cos(z, n)
}

/// `cos(z - pi n/2 - pi/4)` without forming the large shifted argument.
pub(crate) fn shifted_cos(z: f64, n: usize) -> f64 {
    let (s, c) = z.sin_cos();
    // cos(z - pi/4) and sin(z - pi/4)
    let cm = (c + s) * std::f64::consts::FRAC_1_SQRT_2;
    let sm = (s - c) * std::f64::consts::FRAC_1_SQRT_2;
    match n % 4 {
        0 => cm,
        1 => sm,
        2 => -cm,
        _ => -sm,
    }
}

/// `sin(z - pi n/2 - pi/4)`
pub(crate) fn shifted_sin(z: f64, n: usize) -> f64 {
    // sin(a) = cos(a - pi/2) = shifted_cos with n + 1
    shifted_cos(z, n + 1)
}

pub(crate) fn j_unchecked(n: u32, z: f64) -> f64 {
    let n = n as usize;
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if z <= 1.0 {
        return j_series(n, z);
    }
    if z >= hankel_threshold(n) {
        return j_hankel(n, z);
    }
    j_miller(n, z)[n]
}

/// All of `J_0(z), ..., J_{n_max}(z)` at once.
///
/// Miller's algorithm delivers the whole sequence for the cost of a single
/// order, which is what series-over-order sums want.
pub fn bessel_j_sequence(n_max: usize, z: f64) -> Result<Vec<f64>> {
    if n_max > SEQUENCE_MAX_ORDER {
        return Err(Error::Range {
            name: "n_max",
            value: n_max as f64,
            limit: "n_max <= 4096",
        });
    }
    if !(0.0..=J_MAX_ARG).contains(&z) {
        return Err(Error::Range {
            name: "z",
            value: z,
            limit: "0 <= z <= 1e6",
        });
    }
    if z == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    if z <= 1.0 {
        return Ok((0..=n_max).map(|n| j_series(n, z)).collect());
    }
    if z >= hankel_threshold(n_max) {
        return Ok((0..=n_max).map(|n| j_hankel(n, z)).collect());
    }
    let mut v = j_miller(n_max, z);
    v.truncate(n_max + 1);
    Ok(v)
}

fn hankel_threshold(n: usize) -> f64 {
    let n = n as f64;
    (n * n).max(50.0)
}

fn j_series(n: usize, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= half / k as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..60 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_hankel(n: usize, z: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let inv8z = 1.0 / (8.0 * z);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut prev_abs = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) * inv8z / k as f64;
        let a = term.abs();
        if a > prev_abs {
            break;
        }
        prev_abs = a;
        // a_k / z^k enters P for even k, Q for odd k with alternating signs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if a < 1e-17 * p.abs().max(1e-300) {
            break;
        }
    }
    (2.0 / (PI * z)).sqrt() * (p * shifted_cos(z, n) - q * shifted_sin(z, n))
}

/// Backward recurrence from an order well beyond both `n_max` and `z`.
fn j_miller(n_max: usize, z: f64) -> Vec<f64> {
    let excess = 40.0 + 15.0 * z.cbrt();
    let mut m = (n_max as f64).max(z) + excess;
    m = m.ceil();
    let mut m = m as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut vals = vec![0.0; n_max + 1];
    let two_over_z = 2.0 / z;
    let mut above = 0.0; // J_{k+1}
    let mut cur = 1.0e-30; // J_k, starting at k = m
    let mut even_sum = 2.0 * cur; // m is even
    let mut sum_sq = 2.0 * cur * cur;
    if m <= n_max {
        vals[m] = cur;
    }
    for k in (1..=m).rev() {
        let below = k as f64 * two_over_z * cur - above;
        above = cur;
        cur = below;
        let idx = k - 1;
        if idx <= n_max {
            vals[idx] = cur;
        }
        if idx == 0 {
            even_sum += cur;
            sum_sq += cur * cur;
        } else {
            if idx % 2 == 0 {
                even_sum += 2.0 * cur;
            }
            sum_sq += 2.0 * cur * cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            sum_sq *= RESCALE_BY * RESCALE_BY;
            for v in vals.iter_mut().skip(idx) {
                *v *= RESCALE_BY;
            }
        }
    }
    let norm = even_sum.signum() / sum_sq.sqrt();
    for v in vals.iter_mut() {
        *v *= norm;
    }
    vals
}

fn check_i(n: u32, z: f64) -> Result<()> {
    if n > I_MAX_ORDER {
        return Err(Error::Range {
            name: "n",
            value: n as f64,
            limit: "n <= 400",
        });
    }
    if !(0.0..=I_MAX_ARG).contains(&z) {
        return Err(Error::Range {
            name: "z",
            value: z,
            limit: "0 <= z <= 1e4",
        });
    }
    Ok(())
}

/// Exponentially scaled modified Bessel function `e^{-z} I_n(z)`.
///
/// The result lies in `[0, 1]`; relative accuracy is about `1e-14` wherever it
/// exceeds `1e-300`.
pub fn bessel_i_scaled(n: u32, z: f64) -> Result<f64> {
    check_i(n, z)?;
    Ok(i_scaled_sequence_unchecked(n as usize, z)[n as usize])
}

/// `e^{-z} I_k(z)` for `k = 0..=n_max`.
pub fn bessel_i_scaled_sequence(n_max: u32, z: f64) -> Result<Vec<f64>> {
    check_i(n_max, z)?;
    Ok(i_scaled_sequence_unchecked(n_max as usize, z))
}

pub(crate) fn i_scaled_sequence_unchecked(n_max: usize, z: f64) -> Vec<f64> {
    let mut vals = vec![0.0; n_max + 1];
    if z == 0.0 {
        vals[0] = 1.0;
        return vals;
    }
    let m = n_max + 30 + (90.0 * z).sqrt().ceil() as usize;
    let two_over_z = 2.0 / z;
    let mut above = 0.0;
    let mut cur = 1.0e-30;
    let mut sum = 2.0 * cur;
    for k in (1..=m).rev() {
        let below = k as f64 * two_over_z * cur + above;
        above = cur;
        cur = below;
        let idx = k - 1;
        if idx <= n_max {
            vals[idx] = cur;
        }
        sum += if idx == 0 { cur } else { 2.0 * cur };
        if cur > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            sum *= RESCALE_BY;
            for v in vals.iter_mut().skip(idx) {
                *v *= RESCALE_BY;
            }
        }
    }
    let inv = 1.0 / sum;
    for v in vals.iter_mut() {
        *v *= inv;
    }
    vals
}
