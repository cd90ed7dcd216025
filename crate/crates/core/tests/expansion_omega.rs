use std::f64::consts::PI;

use latgreen_core::expansion::{
    f_term, h_term, u_expansion, v_expansion_offorigin, v_expansion_origin, ExpansionOptions,
};
use latgreen_core::kernel::{KernelQuery, LatticePoint};
use latgreen_core::omega::{
    angular_spectrum, e_branches, e_function, e_limit, omega, omega_exact, omega_leading,
    OmegaOptions, E_SERIES_SWITCH,
};
use proptest::prelude::*;

fn profile(n: u32, x: [f64; 2], t: f64) -> f64 {
    let y = [x[0] / t.sqrt(), x[1] / t.sqrt()];
    t.powi(-(n as i32)) * f_term(n, y).unwrap()
}

#[test]
fn u_residual_shrinks_with_order() {
    let opts = ExpansionOptions::default();
    for &(s, t) in &[([0i64, 0i64], 400.0), ([2, 1], 400.0)] {
        let q = KernelQuery::new(LatticePoint::unit(s[0], s[1]), t, 0);
        let r: Vec<f64> = (1..=3)
            .map(|n| u_expansion(&q, n, &opts).unwrap().residual.abs())
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{s:?}: {r:?}");
    }
}

#[test]
fn v_origin_residual_decays() {
    let opts = ExpansionOptions::default();
    let a = v_expansion_origin(1e3, 1.0, 1, &opts).unwrap().residual.abs();
    let b = v_expansion_origin(1e4, 1.0, 1, &opts).unwrap().residual.abs();
    assert!(b < a / 5.0, "{a} -> {b}");
}

#[test]
fn v_offorigin_needs_omega() {
    let p = LatticePoint::unit(3, 2);
    let with = v_expansion_offorigin(&p, 800.0, 1, &ExpansionOptions::default()).unwrap();
    let without = ExpansionOptions {
        include_omega: false,
        ..ExpansionOptions::default()
    };
    let without = v_expansion_offorigin(&p, 800.0, 1, &without).unwrap();
    assert!(with.residual.abs() < without.residual.abs() / 10.0);
}

#[test]
fn regime_is_enforced() {
    let q = KernelQuery::new(LatticePoint::unit(0, 0), 0.5, 0);
    assert!(u_expansion(&q, 1, &ExpansionOptions::default()).is_err());
    let q = KernelQuery::new(LatticePoint::unit(0, 0), 5.0, 0);
    assert!(u_expansion(&q, 4, &ExpansionOptions::default()).is_err());
    assert!(f_term(0, [0.0, 0.0]).is_err());
}

#[test]
fn omega_routes_agree() {
    let opts = OmegaOptions {
        cross_check: true,
        ..OmegaOptions::default()
    };
    for s in [[1i64, 0i64], [2, 1], [4, 3]] {
        let d = omega_exact(&LatticePoint::unit(s[0], s[1]), &opts).unwrap();
        assert!((d.omega - d.omega_direct.unwrap()).abs() < 1e-10, "{s:?}");
    }
}

#[test]
fn omega_square_symmetry() {
    let base = omega(&LatticePoint::unit(3, 1)).unwrap();
    for p in LatticePoint::unit(3, 1).square_orbit() {
        assert!((omega(&p).unwrap() - base).abs() < 1e-11, "{:?}", p.s);
    }
}

#[test]
fn omega_approaches_leading_term() {
    let p = LatticePoint::unit(16, 0);
    let w = omega(&p).unwrap();
    let lead = omega_leading(16.0, 0.0);
    assert!(((w - lead) / lead).abs() < 0.2, "{w} vs {lead}");
}

#[test]
fn spectrum_at_zero_is_two_harmonics() {
    let s = angular_spectrum(0.0, 8).unwrap();
    for (n, &a) in s.a.iter().enumerate() {
        let expected = match n {
            3 => 1.0 / 24.0,
            5 => -1.0 / 24.0,
            _ => 0.0,
        };
        assert!((a - expected).abs() < 1e-14, "a_{n} = {a}");
    }
    assert!(s.b.iter().all(|b| b.abs() < 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn h00_is_the_heat_kernel(y1 in -4.0f64..4.0, y2 in -4.0f64..4.0) {
        let h = h_term(0, 0, [y1, y2]).unwrap();
        let exact = (-(y1 * y1 + y2 * y2) / 4.0).exp() / (4.0 * PI);
        prop_assert!((h - exact).abs() < 1e-16);
    }

    #[test]
    fn profiles_integrate_the_u_terms(n in 0u32..=2, x1 in 0.2f64..4.0, x2 in -3.0f64..3.0, t in 0.5f64..8.0) {
        let x = [x1, x2];
        let dt = 1e-4 * t;
        let lhs = (profile(n, x, t + dt) - profile(n, x, t - dt)) / (2.0 * dt);
        let y = [x1 / t.sqrt(), x2 / t.sqrt()];
        let rhs = t.powi(-(n as i32 + 1)) * h_term(0, n, y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-7 * t.powi(-(n as i32 + 1)), "{lhs} vs {rhs}");
    }

    #[test]
    fn e_reflections(rho in 1e-4f64..3.0, phi in -PI..PI) {
        let e = e_function(rho, phi).unwrap();
        prop_assert!((e_function(rho, -phi).unwrap() - e).abs() < 1e-12);
        prop_assert!((e_function(rho, PI - phi).unwrap() + e).abs() < 1e-12);
    }

    #[test]
    fn e_branches_agree_near_switch(rho in 0.5 * E_SERIES_SWITCH..2.0 * E_SERIES_SWITCH, phi in -PI..PI) {
        let (series, direct) = e_branches(rho, phi).unwrap();
        prop_assert!((series - direct).abs() < 1e-9);
    }

    #[test]
    fn e_tends_to_its_limit(phi in -PI..PI) {
        prop_assert!((e_function(1e-5, phi).unwrap() - e_limit(phi)).abs() < 1e-9);
    }
}
