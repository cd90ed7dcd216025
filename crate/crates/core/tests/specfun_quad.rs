use std::f64::consts::PI;

use latgreen_core::quad::{self, GaussLegendre, PolarDomain, QuadratureSpec, Rule};
use latgreen_core::specfun::{
    bessel_i_scaled_sequence, bessel_j, bessel_j_asymptotic, bessel_j_sequence, euler_gamma,
    exp_integral_e1, gaussian_derivative, heat_gaussian,
};
use proptest::prelude::*;

#[test]
fn polar_areas() {
    let spec = QuadratureSpec::doubling(Rule::PolarProduct, 8, 1e-13);
    let disc = quad::integrate_polar(|_, _| 1.0, &PolarDomain::disc(2.0), &spec).unwrap();
    assert!((disc.value - 4.0 * PI).abs() < 1e-12);
    let square = quad::integrate_polar(|_, _| 1.0, &PolarDomain::square(PI), &spec).unwrap();
    assert!((square.value - 4.0 * PI * PI).abs() < 1e-11);
    let ring = quad::integrate_polar(|_, _| 1.0, &PolarDomain::square_minus_disc(1.0), &spec).unwrap();
    assert!((ring.value - (4.0 - PI)).abs() < 1e-12);
}

#[test]
fn gamma_from_e1() {
    // E_1(x) = -gamma - ln x + x + O(x^2)
    let x = 1e-9;
    let g = -exp_integral_e1(x).unwrap() - x.ln() + x;
    assert!((g - euler_gamma()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn j_is_bounded(n in 0u32..=200, z in 0.0f64..1e5) {
        prop_assert!(bessel_j(n, z).unwrap().abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn j_recurrence(n in 1u32..=150, z in 0.5f64..2e3) {
        let l = bessel_j(n - 1, z).unwrap() + bessel_j(n + 1, z).unwrap();
        let r = 2.0 * n as f64 / z * bessel_j(n, z).unwrap();
        prop_assert!((l - r).abs() < 1e-11 * (1.0 + 2.0 * n as f64 / z));
    }

    #[test]
    fn j_addition_sum(z in 0.0f64..500.0) {
        let j = bessel_j_sequence((1.2 * z + 80.0) as usize, z).unwrap();
        let s: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-12);
        let sq: f64 = j[0] * j[0] + 2.0 * j.iter().skip(1).map(|v| v * v).sum::<f64>();
        prop_assert!((sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_split_adds_up(n in 0u32..=30, z in 1.0f64..1e4) {
        let a = bessel_j_asymptotic(n, z).unwrap();
        prop_assert!((a.leading + a.remainder - bessel_j(n, z).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn scaled_i_generating_function(z in 0.0f64..1e3) {
        let i = bessel_i_scaled_sequence(400, z).unwrap();
        let s: f64 = i[0] + 2.0 * i.iter().skip(1).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e1_derivative(x in 0.01f64..50.0) {
        let h = 1e-5 * x;
        let d = (exp_integral_e1(x + h).unwrap() - exp_integral_e1(x - h).unwrap()) / (2.0 * h);
        let exact = -(-x).exp() / x;
        prop_assert!((d - exact).abs() < 1e-7 * exact.abs());
    }

    #[test]
    fn gaussian_first_derivatives(y1 in -5.0f64..5.0, y2 in -5.0f64..5.0) {
        let h = heat_gaussian([y1, y2]);
        prop_assert!((gaussian_derivative(1, 0, [y1, y2]).unwrap() + 0.5 * y1 * h).abs() < 1e-16);
        prop_assert!((gaussian_derivative(0, 1, [y1, y2]).unwrap() + 0.5 * y2 * h).abs() < 1e-16);
    }

    #[test]
    fn gauss_legendre_polynomial_exactness(n in 1usize..=40, k in 0u32..80, a in -3.0f64..0.0, b in 0.1f64..3.0) {
        prop_assume!(k < 2 * n as u32);
        let rule = GaussLegendre::new(n);
        let got = rule.integrate(a, b, |x| x.powi(k as i32));
        let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
        let scale = a.abs().max(b).powi(k as i32 + 1);
        prop_assert!((got - exact).abs() < 1e-13 * scale.max(1.0));
    }

    #[test]
    fn periodic_trapezoid_integrates_trig(k1 in 0i32..6, k2 in 0i32..6) {
        let spec = QuadratureSpec::doubling(Rule::PeriodicTrapezoid2d, 16, 1e-14);
        let r = quad::integrate_periodic_2d(|a, b| (k1 as f64 * a).cos() * (k2 as f64 * b).cos(), &spec).unwrap();
        let exact = if k1 == 0 && k2 == 0 { 4.0 * PI * PI } else { 0.0 };
        prop_assert!((r.value - exact).abs() < 1e-12);
    }
}
