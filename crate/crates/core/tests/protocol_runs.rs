use std::f64::consts::PI;

use meascool::{
    asymptotic_limit, run, thermal_distribution, PhysicalParams64, ProtocolSchedule64, Segment64,
    ThermalSpec64, Variant, HBAR, K_B,
};
use proptest::prelude::*;

const OMEGA_M: f64 = 1.56e10;

fn magnon(g_f_over_g_m: f64) -> PhysicalParams64 {
    let g_m = 2.0 * PI * 1e6;
    PhysicalParams64::from_si(OMEGA_M, g_m, g_f_over_g_m * g_m, 0.0, 700.0 / OMEGA_M).unwrap()
}

fn run_single(variant: Variant, kelvin: f64, steps: usize) -> meascool::RunOutcome64 {
    let schedule = ProtocolSchedule64::single(variant, magnon(30.0), steps);
    let initial = schedule
        .initial_state(&ThermalSpec64::from_temperature(kelvin, OMEGA_M))
        .unwrap();
    run(&initial, &schedule).unwrap()
}

#[test]
fn both_protocols_lose_survival_quickly_at_ten_kelvin() {
    for variant in [Variant::Conventional, Variant::Driven] {
        let out = run_single(variant, 10.0, 40);
        let p40 = out.at(40).unwrap().survival;
        assert!(p40 < 0.1, "{variant}: P_g(40) = {p40}");
        assert!(p40 > 0.01, "{variant}: P_g(40) = {p40}");
    }
}

#[test]
fn zero_steps_gives_only_the_initial_record() {
    let out = run_single(Variant::Driven, 10.0, 0);
    assert_eq!(out.records.len(), 1);
    let r = out.terminal();
    assert_eq!(r.step, 0);
    assert_eq!(r.survival, 1.0);
    assert!((r.n_bar - 83.424).abs() < 1e-3);
}

#[test]
fn hybrid_cools_below_either_single_protocol() {
    let schedule = ProtocolSchedule64::new(vec![
        Segment64::new(Variant::Driven, magnon(30.0), 30),
        Segment64::new(Variant::Conventional, magnon(0.0), 30),
    ])
    .unwrap();
    let initial = schedule
        .initial_state(&ThermalSpec64::from_temperature(10.0, OMEGA_M))
        .unwrap();
    let hybrid = run(&initial, &schedule).unwrap();
    let driven = run_single(Variant::Driven, 10.0, 60);
    let conventional = run_single(Variant::Conventional, 10.0, 60);
    let h = hybrid.at(60).unwrap().n_bar;
    assert!(h < driven.at(60).unwrap().n_bar);
    assert!(h < conventional.at(60).unwrap().n_bar);
    assert_eq!(hybrid.segment_per_step()[29..31], [0, 1]);
}

#[test]
fn long_run_approaches_the_protected_level_limit() {
    let params = magnon(0.0);
    let schedule = ProtocolSchedule64::single(Variant::Conventional, params, 4000);
    let initial = schedule
        .initial_state(&ThermalSpec64::from_mean(2.0))
        .unwrap();
    let limit = asymptotic_limit(&initial, Variant::Conventional, &params);
    let out = run(&initial, &schedule).unwrap();
    let r = out.terminal();
    assert!(!out.truncated);
    assert!(
        (r.survival - limit.survival_limit).abs() < 1e-3,
        "{} vs {}",
        r.survival,
        limit.survival_limit
    );
}

/// After `N` driven measurements at small `n`, `ln p_n` falls with slope
/// `−ħω/k_BT − 2N g_m² (1 − cos g_f τ) / (g_f² + g_m²)` to first order in `n`.
#[test]
fn cooled_histogram_keeps_the_first_order_thermal_slope() {
    let params = magnon(30.0);
    let kelvin = 10.0;
    let steps = 60;
    let out = run_single(Variant::Driven, kelvin, steps);
    let lp = out.final_state.log_probabilities();
    let m = 21.0;
    let mx = 10.0;
    let my = lp[..=20].iter().sum::<f64>() / m;
    let sxy: f64 = (0..=20).map(|n| (n as f64 - mx) * (lp[n] - my)).sum();
    let sxx: f64 = (0..=20).map(|n| (n as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;

    let (g_m, g_f, tau) = (params.g_m(), params.g_f(), params.tau());
    let expected = -(HBAR * OMEGA_M / (K_B * kelvin)
        + 2.0 * steps as f64 * g_m * g_m * (1.0 - (g_f * tau).cos()) / (g_f * g_f + g_m * g_m));
    assert!(
        ((slope - expected) / expected).abs() < 0.05,
        "{slope} vs {expected}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn survival_never_increases(
        n_bar in 0.0f64..200.0,
        g_f in 0.0f64..60.0,
        steps in 0usize..80,
        variant in prop::sample::select(Variant::ALL.to_vec()),
    ) {
        let p = magnon(g_f).with_delta_e(3.0 * magnon(0.0).g_m()).unwrap();
        let schedule = ProtocolSchedule64::single(variant, p, steps);
        let initial = schedule.initial_state(&ThermalSpec64::from_mean(n_bar)).unwrap();
        let out = run(&initial, &schedule).unwrap();
        prop_assert_eq!(out.records[0].survival, 1.0);
        for w in out.records.windows(2) {
            prop_assert!(w[1].survival <= w[0].survival);
        }
        for r in &out.records {
            prop_assert!(r.ground_fidelity >= 0.0 && r.ground_fidelity <= 1.0);
            prop_assert!(r.thermal_fidelity >= 0.0 && r.thermal_fidelity <= 1.0);
        }
    }

    #[test]
    fn thermal_start_has_the_requested_mean(n_bar in 0.0f64..2000.0) {
        let d = thermal_distribution(&ThermalSpec64::from_mean(n_bar)).unwrap();
        let mean = d.mean_occupation().unwrap();
        prop_assert!((mean - n_bar).abs() <= 1e-9 * n_bar.max(1.0));
    }
}
