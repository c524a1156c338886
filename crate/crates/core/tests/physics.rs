use esd_core::dynamics::{evolve, evolve_full_liouvillian, stationary_state, Mode, XState};
use esd_core::entanglement::{analyze_esd, ConcurrenceSeries, DEFAULT_DWELL};
use esd_core::kernels::{delta_closed, delta_quadrature, markov_limits, BathParams, CoefficientModel};

fn death(a: f64, bath: &BathParams, horizon: f64) -> Option<f64> {
    let traj = evolve(&XState::yu_eberly(a).unwrap(), bath, Mode::NonMarkovian, horizon, 0.05).unwrap();
    analyze_esd(&ConcurrenceSeries::from_trajectory(&traj), bath, DEFAULT_DWELL).death_time
}

#[test]
fn closed_form_delta_matches_quadrature_at_reference_point() {
    let bath = BathParams::ohmic(0.1, 3.0).unwrap();
    let closed = delta_closed(1.0, &bath).unwrap();
    let quad = delta_quadrature(1.0, &bath).unwrap();
    assert!((closed - quad).abs() <= 1e-6 * quad.abs().max(1.0), "{closed} vs {quad}");
}

#[test]
fn high_temperature_limit() {
    for r in [0.1, 1.0, 10.0] {
        let m = markov_limits(&BathParams::ohmic(r, 1e4).unwrap());
        let expected = 2.0 * 1e4 * r * r / (1.0 + r * r);
        assert!((m.delta / expected - 1.0).abs() < 1e-6);
    }
}

#[test]
fn zero_temperature_threshold_behaviour() {
    let bath = BathParams::ohmic(0.1, 0.0).unwrap();
    assert_eq!(death(0.0, &bath, 100.0), None);
    let d = death(1.0, &bath, 100.0).expect("a = 1 dies");
    assert!(d > 20.0 && d < 30.0, "{d}");
}

#[test]
fn every_state_dies_at_finite_temperature() {
    let bath = BathParams::ohmic(0.1, 3.0).unwrap();
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let d = death(a, &bath, 10.0).expect("finite death");
        assert!(d > 0.5 && d < 1.5, "a = {a}: {d}");
    }
}

#[test]
fn stationary_state_is_thermal() {
    let bath = BathParams::ohmic(0.1, 3.0).unwrap();
    let s = stationary_state(&bath);
    let m = markov_limits(&bath);
    let up = (m.delta - m.gamma) / (2.0 * m.delta);
    let down = (m.delta + m.gamma) / (2.0 * m.delta);
    assert!((s.p11 - up * up).abs() < 1e-14);
    assert!((s.p44 - down * down).abs() < 1e-14);
    assert!((s.p22 - up * down).abs() < 1e-14);
    assert_eq!(s.c23.norm(), 0.0);
}

#[test]
fn full_master_equation_agrees_with_x_equations() {
    let bath = BathParams::ohmic(0.5, 1.0).unwrap();
    let initial = XState::yu_eberly(0.4).unwrap();
    let x = evolve(&initial, &bath, Mode::NonMarkovian, 5.0, 0.5).unwrap();
    let full = evolve_full_liouvillian(&initial.to_matrix(), &bath, Mode::NonMarkovian, 5.0, 0.5).unwrap();
    for (s, rho) in x.states.iter().zip(&full.states) {
        let diff = (s.to_matrix() - rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-7, "{diff}");
    }
}

#[test]
fn markovian_model_is_constant() {
    let bath = BathParams::ohmic(1.0, 2.0).unwrap();
    let model = CoefficientModel::markovian(&bath).unwrap();
    let m = markov_limits(&bath);
    for t in [0.0, 0.3, 7.0, 1e3] {
        assert_eq!(model.rates(t).unwrap(), (m.delta, m.gamma));
    }
}
