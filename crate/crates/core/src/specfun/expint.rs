//! Exponential integral `E_1` and the exponential-integral route to the
//! Euler-Mascheroni constant.

use crate::error::{Error, Result};

/// `E_1(x) = int_x^inf e^{-u}/u du` for `x > 0`, to about `1e-15` relative.
///
/// For `x > 1` a continued fraction is used. For `x <= 1` the value is
/// anchored at `E_1(1)` and completed with the entire series of
/// `int_x^1 (e^{-u} - 1)/u du`, so the Euler-Mascheroni constant never has
/// to be supplied as a literal.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("E1 needs finite x > 0, got {x}")));
    }
    Ok(e1_unchecked(x))
}

pub(crate) fn e1_unchecked(x: f64) -> f64 {
    if x > 1.0 {
        return e1_continued_fraction(x);
    }
    let mut sum = 0.0;
    let mut fact = 1.0;
    let mut xk = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        fact *= kf;
        xk *= x;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (1.0 - xk) / (kf * fact);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    e1_continued_fraction(1.0) - x.ln() + sum
}

/// Modified Lentz evaluation of `e^{x} E_1(x)` as a continued fraction.
fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1.0e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// Euler-Mascheroni constant from
/// `int_0^1 (1 - e^{-z})/z dz - int_1^inf e^{-z}/z dz`.
pub fn euler_gamma() -> f64 {
    // int_0^1 (1 - e^{-z})/z dz = sum_{k>=1} (-1)^{k+1} / (k k!)
    let mut head = 0.0;
    let mut fact = 1.0;
    for k in 1..30 {
        let kf = k as f64;
        fact *= kf;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        head += sign / (kf * fact);
    }
    head - e1_continued_fraction(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-2.0).is_err());
        assert!(exp_integral_e1(f64::NAN).is_err());
    }

    #[test]
    fn large_x_band() {
        for x in [10.0, 20.0, 50.0, 300.0] {
            let v = exp_integral_e1(x).unwrap();
            let lead = (-x).exp() / x;
            assert!((v / lead - 1.0).abs() < 0.2);
            assert!(v < lead);
        }
    }

    #[test]
    fn continuous_across_branch() {
        let below = exp_integral_e1(1.0).unwrap();
        let above = exp_integral_e1(1.0 + 1e-12).unwrap();
        assert!((below - above).abs() < 1e-11);
        assert!((euler_gamma() - 0.577_215_664_901_532_9).abs() < 1e-15);
    }
}
