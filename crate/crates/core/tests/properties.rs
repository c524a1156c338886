use esd_core::controller::{controlled_temperature, temperature_schedule, ControllerConfig};
use esd_core::dynamics::{evolve, Mode, XState};
use esd_core::entanglement::{
    analyze_esd, concurrence_general, concurrence_x, entanglement_of_formation, ConcurrenceSeries,
};
use esd_core::kernels::{gamma_closed, BathParams};
use esd_core::special_fn::{fbar_at, gbar_at, hyp2f1, HypParams, SeriesOptions};
use esd_core::validate::random_x_state;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

/// Complex x kept away from the poles at non-positive integers.
fn complex_x() -> impl Strategy<Value = Complex64> {
    (-3.5f64..3.5, 0.1f64..4.0, any::<bool>())
        .prop_map(|(re, im, neg)| Complex64::new(re, if neg { -im } else { im }))
}

fn swap_qubits(s: &XState) -> XState {
    XState {
        p22: s.p33,
        p33: s.p22,
        c23: s.c23.conj(),
        ..*s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_series_match_gauss_series(x in complex_x(), z in 0.0f64..0.9) {
        let one = Complex64::new(1.0, 0.0);
        let opts = SeriesOptions::default();
        let f = fbar_at(x, z, None, opts).unwrap();
        let f_ref = hyp2f1(&HypParams::new(x, one, one + x, z), opts).unwrap();
        prop_assert!(close(f, f_ref, 1e-10), "F: {f} vs {f_ref}");
        let g = gbar_at(x, z, None, opts).unwrap();
        let g_ref = hyp2f1(&HypParams::new(2.0 * one, one + x, 2.0 * one + x, z), opts).unwrap();
        prop_assert!(close(g, g_ref, 1e-10), "G: {g} vs {g_ref}");
    }

    #[test]
    fn reduced_series_commute_with_conjugation(x in complex_x(), z in 0.0f64..0.95) {
        let opts = SeriesOptions::default();
        let f = fbar_at(x, z, None, opts).unwrap();
        let fc = fbar_at(x.conj(), z, None, opts).unwrap();
        prop_assert!(close(fc, f.conj(), 1e-13));
        let g = gbar_at(x, z, None, opts).unwrap();
        let gc = gbar_at(x.conj(), z, None, opts).unwrap();
        prop_assert!(close(gc, g.conj(), 1e-13));
    }

    #[test]
    fn fast_path_matches_general_concurrence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_x_state(&mut rng);
        let general = concurrence_general(&s.to_matrix()).unwrap();
        let (fast, k) = concurrence_x(&s);
        prop_assert!((general - fast).abs() <= 1e-10, "{general} vs {fast}");
        prop_assert_eq!(fast, (2.0 * k).clamp(0.0, 1.0));
    }

    #[test]
    fn entanglement_of_formation_is_monotone(c1 in 0.0f64..=1.0, c2 in 0.0f64..=1.0) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let (e_lo, e_hi) = (entanglement_of_formation(lo), entanglement_of_formation(hi));
        prop_assert!(e_lo <= e_hi + 1e-15);
        prop_assert!((0.0..=1.0).contains(&e_lo) && (0.0..=1.0).contains(&e_hi));
    }

    #[test]
    fn gamma_ignores_temperature(t in 0.0f64..200.0, r in 0.01f64..20.0, kt1 in 0.0f64..500.0, kt2 in 0.0f64..500.0) {
        let b1 = BathParams::ohmic(r, kt1).unwrap();
        let b2 = BathParams::ohmic(r, kt2).unwrap();
        prop_assert_eq!(gamma_closed(t, &b1).to_bits(), gamma_closed(t, &b2).to_bits());
    }

    #[test]
    fn controlled_temperature_stays_in_range(
        delta in -50.0f64..50.0,
        gamma in -5.0f64..5.0,
        alpha in 0.0f64..10.0,
        kt0 in 0.0f64..1000.0,
        neglect_gamma in any::<bool>(),
    ) {
        let cfg = ControllerConfig { alpha, kt0, update_step: 0.1, neglect_gamma };
        let kt = controlled_temperature(delta, gamma, &cfg);
        prop_assert!(kt >= 0.0 && kt <= kt0, "kt {kt} outside [0, {kt0}]");
        if alpha == 0.0 {
            prop_assert_eq!(kt, kt0);
        }
    }

    #[test]
    fn revivals_are_ordered_and_disjoint(bits in prop::collection::vec(any::<bool>(), 2..200)) {
        let n = bits.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.25).collect();
        let k: Vec<f64> = bits.iter().map(|&b| if b { 0.1 } else { -0.1 }).collect();
        let series = ConcurrenceSeries {
            times: times.clone(),
            k1: k.clone(),
            k2: k.clone(),
            concurrence: k.iter().map(|v| v.max(0.0)).collect(),
            k,
        };
        let bath = BathParams::ohmic(0.1, 3.0).unwrap();
        let report = analyze_esd(&series, &bath, 1.0);
        let horizon = times[n - 1];
        let mut last = match report.death_time {
            Some(d) => d,
            None => {
                prop_assert!(report.revivals.is_empty());
                return Ok(());
            }
        };
        prop_assert!((0.0..=horizon).contains(&last));
        for &(start, end) in &report.revivals {
            prop_assert!(start > last && start <= end && end <= horizon, "{:?}", report);
            last = end;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_is_conserved(a in 0.0f64..=1.0, kt in 0.0f64..50.0, r in 0.05f64..3.0) {
        let bath = BathParams::ohmic(r, kt).unwrap();
        let traj = evolve(&XState::yu_eberly(a).unwrap(), &bath, Mode::NonMarkovian, 3.0, 0.1).unwrap();
        prop_assert!(traj.max_trace_drift <= 1e-9);
        for s in &traj.states {
            prop_assert!((s.trace() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn evolution_commutes_with_qubit_exchange(seed in any::<u64>(), kt in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_x_state(&mut rng);
        let bath = BathParams::ohmic(0.1, kt).unwrap();
        let direct = evolve(&s, &bath, Mode::NonMarkovian, 2.0, 0.25).unwrap();
        let swapped = evolve(&swap_qubits(&s), &bath, Mode::NonMarkovian, 2.0, 0.25).unwrap();
        for (x, y) in direct.states.iter().zip(&swapped.states) {
            let sx = swap_qubits(x);
            for (u, v) in sx.populations().iter().zip(y.populations()) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
            prop_assert!((sx.c23 - y.c23).norm() <= 1e-12);
            prop_assert!((sx.c14 - y.c14).norm() <= 1e-12);
        }
    }

    #[test]
    fn schedule_tiles_the_horizon(alpha in 0.0f64..4.0, kt0 in 0.1f64..50.0, horizon in 0.5f64..10.0) {
        let bath = BathParams::ohmic(0.1, kt0).unwrap();
        let cfg = ControllerConfig::new(alpha, kt0).unwrap();
        let segments = temperature_schedule(&bath, &cfg, horizon).unwrap();
        prop_assert_eq!(segments[0].start, 0.0);
        prop_assert_eq!(segments.last().unwrap().end, horizon);
        for w in segments.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
        }
        for s in &segments {
            prop_assert!(s.kt >= 0.0 && s.kt <= kt0);
        }
        prop_assert_eq!(segments.clone(), temperature_schedule(&bath, &cfg, horizon).unwrap());
    }
}
