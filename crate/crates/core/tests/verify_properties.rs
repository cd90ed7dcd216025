use latgreen_core::verify::{
    alpha_sums, bounded_no_growth, bound_dashboard, fit_decay, format_float, profile_integral,
    DashboardConfig, SeriesTestCase, Verdict,
};
use proptest::prelude::*;

fn power_law(c: f64, p: f64, scales: &[f64]) -> Vec<(f64, f64)> {
    scales.iter().map(|&s| (s, c * s.powf(p))).collect()
}

const SCALES: [f64; 6] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0];

#[test]
fn noisy_power_law_slope() {
    // deterministic multiplicative noise of up to 10%
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for &p in &[-1.0, -2.5, -4.0] {
        let samples: Vec<(f64, f64)> = (0..16)
            .map(|k| {
                let s = 10.0 * 2f64.powf(k as f64 * 0.4);
                (s, 3.0 * s.powf(p) * (1.0 + 0.2 * (next() - 0.5)))
            })
            .collect();
        let fit = fit_decay(&samples).unwrap();
        assert!((fit.slope - p).abs() < 0.1, "p = {p}: {}", fit.slope);
        assert!(fit.reliable());
    }
}

#[test]
fn dashboard_subset_is_deterministic() {
    let cfg = DashboardConfig::only(&["gamma_identity", "e_spectrum", "bessel_abs_bound"]);
    let a = bound_dashboard(&cfg).unwrap();
    let b = bound_dashboard(&cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    for (x, y) in a.suites.iter().zip(&b.suites) {
        assert_eq!(x.table.to_csv(), y.table.to_csv());
    }
    let names: Vec<&str> = a.suites.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["bessel_abs_bound", "e_spectrum", "gamma_identity"]);
    assert!(a.suites.iter().all(|s| s.verdict == Verdict::Pass));
}

#[test]
fn config_round_trips_through_json() {
    let cfg = DashboardConfig::only(&["omega_routes"]);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: DashboardConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, back);
    let partial: DashboardConfig = serde_json::from_str(r#"{"suites": ["gamma_identity"]}"#).unwrap();
    assert_eq!(partial.coefficients, DashboardConfig::all().coefficients);
    assert!(DashboardConfig::only(&["nope"]).validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_recovers_exact_power_laws(c in 1e-6f64..1e6, p in -6.0f64..2.0) {
        let fit = fit_decay(&power_law(c, p, &SCALES)).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!((fit.prefactor / c - 1.0).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn fit_is_scale_equivariant(c in 1e-3f64..1e3, p in -5.0f64..0.0, k in 1e-4f64..1e4, lambda in 0.1f64..10.0) {
        let base = fit_decay(&power_law(c, p, &SCALES)).unwrap();
        let scaled_values: Vec<(f64, f64)> = power_law(c, p, &SCALES).iter().map(|&(s, r)| (s, k * r)).collect();
        let fv = fit_decay(&scaled_values).unwrap();
        prop_assert!((fv.slope - base.slope).abs() < 1e-10);
        prop_assert!((fv.prefactor / (k * base.prefactor) - 1.0).abs() < 1e-9);
        let stretched: Vec<(f64, f64)> = power_law(c, p, &SCALES).iter().map(|&(s, r)| (lambda * s, r)).collect();
        let fs = fit_decay(&stretched).unwrap();
        prop_assert!((fs.slope - base.slope).abs() < 1e-10);
    }

    #[test]
    fn fit_needs_enough_samples(n in 0usize..4) {
        prop_assert!(fit_decay(&power_law(1.0, -1.0, &SCALES[..n])).is_err());
    }

    #[test]
    fn constant_sequences_do_not_grow(v in 1e-6f64..1e6, n in 3usize..20) {
        prop_assert!(bounded_no_growth(&vec![v; n]));
        let mut growing = vec![v; n];
        growing[n - 1] = 2.0 * v;
        prop_assert!(!bounded_no_growth(&growing));
    }

    #[test]
    fn float_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let text = format_float(x);
        prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn alpha_truncation_doubling(z in 100.0f64..5000.0, which in 0usize..3) {
        let case = [
            SeriesTestCase::alpha_inverse_fifth(),
            SeriesTestCase::alpha_single(),
            SeriesTestCase::alpha_alternating(),
        ][which].clone();
        let m = case.truncation(z);
        let (a, la) = alpha_sums(&case, z, m).unwrap();
        let (b, lb) = alpha_sums(&case, z, 2 * m).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((la - lb).abs() < 1e-10);
    }

    #[test]
    fn profile_truncation_doubling(sigma in 100.0f64..800.0) {
        let case = SeriesTestCase::a_exp_sixth();
        let m = case.truncation(sigma);
        let a = profile_integral(&case, sigma, m).unwrap();
        let b = profile_integral(&case, sigma, 2 * m).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}
