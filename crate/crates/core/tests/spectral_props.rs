use std::f64::consts::PI;

use proptest::prelude::*;
use unital_nm::spectral::{
    gamma_big, gamma_big_estimate, gamma_rate, j_omega, QuadratureConfig, SpectralParams,
};

/// Γ(s − 1) for the s values used below.
fn gamma_fn(s: f64) -> f64 {
    let table = [
        (0.5, -2.0 * PI.sqrt()),
        (1.5, PI.sqrt()),
        (2.0, 1.0),
        (3.0, 1.0),
        (4.0, 2.0),
        (5.0, 6.0),
    ];
    table
        .iter()
        .find(|(k, _)| *k == s)
        .map(|(_, v)| *v)
        .unwrap()
}

/// Closed form of 4∫ω_c^{1−s} ω^{s−2} e^{−ω/ω_c}(1 − cos ωt) dω at ω_c = 1,
/// valid for s ≠ 1.
fn closed_form(s: f64, t: f64) -> f64 {
    let k = s - 1.0;
    4.0 * gamma_fn(s) * (1.0 - (k * t.atan()).cos() * (1.0 + t * t).powf(-k / 2.0))
}

fn closed_form_rate(s: f64, t: f64) -> f64 {
    let k = s - 1.0;
    4.0 * gamma_fn(s) * k * (1.0 + t * t).powf(-s / 2.0) * (s * t.atan()).sin()
}

#[test]
fn gamma_big_matches_closed_forms() {
    let q = QuadratureConfig::default();
    for s in [0.5, 1.5, 2.0, 3.0, 4.0, 5.0] {
        let p = SpectralParams::new(s, 1.0).unwrap();
        for i in 0..60 {
            let t = 0.25 * i as f64;
            let exact = closed_form(s, t);
            let got = gamma_big(&p, t, &q).unwrap();
            assert!(
                (got - exact).abs() <= 1e-7 * (1.0 + exact.abs()),
                "s={s} t={t}: {got} vs {exact}"
            );
        }
    }
}

#[test]
fn gamma_rate_matches_closed_forms_and_differences() {
    let q = QuadratureConfig::default();
    for s in [0.5, 1.5, 3.0, 4.0] {
        let p = SpectralParams::new(s, 1.0).unwrap();
        for i in 1..50 {
            let t = 0.2 * i as f64;
            let rate = gamma_rate(&p, t, &q).unwrap();
            let exact = closed_form_rate(s, t);
            assert!(
                (rate - exact).abs() <= 1e-7 * (1.0 + exact.abs()),
                "s={s} t={t}"
            );
            let h = 1e-4;
            let fd =
                (gamma_big(&p, t + h, &q).unwrap() - gamma_big(&p, t - h, &q).unwrap()) / (2.0 * h);
            assert!(
                (rate - fd).abs() <= 1e-6f64.max(1e-4 * rate.abs()),
                "s={s} t={t}"
            );
        }
    }
}

#[test]
fn ohmic_rate_is_never_negative() {
    let p = SpectralParams::new(1.0, 1.0).unwrap();
    let q = QuadratureConfig::default();
    for i in 0..200 {
        let t = 0.25 * i as f64;
        let rate = gamma_rate(&p, t, &q).unwrap();
        assert!((rate - 4.0 * t / (1.0 + t * t)).abs() < 1e-8);
    }
}

#[test]
fn super_ohmic_rate_turns_negative() {
    let p = SpectralParams::new(3.0, 1.0).unwrap();
    let q = QuadratureConfig::default();
    assert!(gamma_rate(&p, 1.0, &q).unwrap() > 0.0);
    assert!(gamma_rate(&p, 3.0, &q).unwrap() < 0.0);
}

#[test]
fn spectral_density_peaks_at_s_omega_c() {
    let p = SpectralParams::new(3.0, 1.0).unwrap();
    let best = (1..6000)
        .map(|i| i as f64 * 1e-3)
        .max_by(|a, b| j_omega(&p, *a).total_cmp(&j_omega(&p, *b)))
        .unwrap();
    assert!((best - 3.0).abs() < 2e-3);
}

#[test]
fn estimates_report_small_errors_and_tails() {
    let p = SpectralParams::new(2.0, 1.0).unwrap();
    let e = gamma_big_estimate(&p, 5.0, &QuadratureConfig::default()).unwrap();
    assert!(e.error < 1e-8 * e.value.abs().max(1.0));
    assert!(e.tail_bound < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(SpectralParams::new(0.0, 1.0).is_err());
    assert!(SpectralParams::new(1.0, -1.0).is_err());
    let p = SpectralParams::new(1.0, 1.0).unwrap();
    assert!(gamma_big(&p, -1.0, &QuadratureConfig::default()).is_err());
    let narrow = QuadratureConfig {
        omega_max_factor: 5.0,
        ..Default::default()
    };
    assert!(gamma_big(&p, 1.0, &narrow).is_err());
}

#[test]
fn exhausted_segment_budget_is_a_convergence_error() {
    let p = SpectralParams::new(3.0, 1.0).unwrap();
    let starved = QuadratureConfig {
        rel_tol: 1e-15,
        abs_tol: 1e-300,
        max_segments: 3,
        ..Default::default()
    };
    assert!(matches!(
        gamma_big(&p, 40.0, &starved),
        Err(unital_nm::Error::Convergence { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gamma_depends_on_omega_c_times_t(s in 0.3f64..5.0, wc in 0.2f64..5.0, t in 0.0f64..15.0) {
        let q = QuadratureConfig::default();
        let a = gamma_big(&SpectralParams::new(s, wc).unwrap(), t, &q).unwrap();
        let b = gamma_big(&SpectralParams::new(s, 1.0).unwrap(), wc * t, &q).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()));
        prop_assert!(a >= 0.0);
    }
}
