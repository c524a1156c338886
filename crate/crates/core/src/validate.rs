//! Self-checks that compare independent computations: closed form against
//! quadrature, X-state equations against the full Liouvillian, the
//! concurrence fast path against the general formula, and the coherence law.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, evolve_full_liouvillian, rhs, stationary_state, Mode, XState};
use crate::entanglement::{concurrence_general, concurrence_x};
use crate::error::Result;
use crate::kernels::{
    delta_closed, delta_quadrature, gamma_closed, gamma_quadrature, markov_limits, BathParams,
    CoefficientModel,
};
use crate::quadrature::{integrate_panels, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub seed: u64,
    pub kernel_points: usize,
    pub x_states: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_229,
            kernel_points: 50,
            x_states: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation, in the units of `tolerance`.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn result(name: &str, outcome: Result<(f64, String)>, tolerance: f64) -> CheckResult {
    match outcome {
        Ok((metric, detail)) => CheckResult {
            name: name.into(),
            passed: metric <= tolerance,
            metric,
            tolerance,
            detail,
        },
        Err(e) => CheckResult {
            name: name.into(),
            passed: false,
            metric: f64::INFINITY,
            tolerance,
            detail: format!("{}: {e}", e.code()),
        },
    }
}

/// A random physical X state with complex coherences.
pub fn random_x_state<R: Rng>(rng: &mut R) -> XState {
    let mut p = [0.0; 4];
    for v in p.iter_mut() {
        *v = -rng.random::<f64>().max(1e-300).ln();
    }
    let sum: f64 = p.iter().sum();
    for v in p.iter_mut() {
        *v /= sum;
    }
    let mut coherence = |a: f64, b: f64| {
        let m = (a * b).sqrt() * rng.random::<f64>();
        Complex64::from_polar(m, rng.random_range(0.0..std::f64::consts::TAU))
    };
    let c23 = coherence(p[1], p[2]);
    let c14 = coherence(p[0], p[3]);
    XState {
        p11: p[0],
        p22: p[1],
        p33: p[2],
        p44: p[3],
        c23,
        c14,
    }
}

/// Random `(r, kT, t)` with `t` in `[t_min, 30]`; returns the worst scaled
/// deviation `|closed - quadrature| / max(1, |value|)` over Δ and γ.
pub fn kernel_oracle(seed: u64, points: usize) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut at = String::new();
    for _ in 0..points {
        let r = rng.random_range(0.05..=10.0);
        let kt = rng.random_range(0.5..=300.0);
        let bath = BathParams::ohmic(r, kt)?;
        let t = rng.random_range(bath.t_min()..=30.0);
        let d_closed = delta_closed(t, &bath)?;
        let d_quad = delta_quadrature(t, &bath)?;
        let g_closed = gamma_closed(t, &bath);
        let g_quad = gamma_quadrature(t, &bath)?;
        let dev_d = (d_closed - d_quad).abs() / d_closed.abs().max(1.0);
        let dev_g = (g_closed - g_quad).abs() / g_closed.abs().max(1.0);
        let dev = dev_d.max(dev_g);
        if dev >= worst {
            worst = dev;
            at = format!("r = {r:.6}, kT = {kt:.6}, t = {t:.6}");
        }
    }
    Ok((worst, format!("{points} points, worst at {at}")))
}

/// Full-Liouvillian evolution of X-form states: worst non-X entry and worst
/// X-entry mismatch against the X-state integrator.
pub fn x_closure(seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let bath = BathParams::ohmic(0.1, 3.0)?;
    let starts = [XState::yu_eberly(0.3)?, random_x_state(&mut rng)];
    let mut off_x = 0.0f64;
    let mut mismatch = 0.0f64;
    for s in &starts {
        let full = evolve_full_liouvillian(&s.to_matrix(), &bath, Mode::NonMarkovian, 10.0, 0.5)?;
        let x = evolve(s, &bath, Mode::NonMarkovian, 10.0, 0.5)?;
        for (m, xs) in full.states.iter().zip(&x.states) {
            for i in 0..4 {
                for j in 0..4 {
                    let on_x = i == j || i + j == 3;
                    if !on_x {
                        off_x = off_x.max(m[(i, j)].norm());
                    }
                }
            }
            let from_full = XState::from_matrix(m);
            let pairs = [
                (from_full.p11, xs.p11),
                (from_full.p22, xs.p22),
                (from_full.p33, xs.p33),
                (from_full.p44, xs.p44),
                (from_full.c23.re, xs.c23.re),
                (from_full.c23.im, xs.c23.im),
                (from_full.c14.re, xs.c14.re),
                (from_full.c14.im, xs.c14.im),
            ];
            for (a, b) in pairs {
                mismatch = mismatch.max((a - b).abs());
            }
        }
    }
    Ok((off_x, mismatch))
}

/// Worst `|C_X - C_general|` over random X states.
pub fn fast_path(seed: u64, count: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfa57);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let s = random_x_state(&mut rng);
        let general = concurrence_general(&s.to_matrix())?;
        worst = worst.max((concurrence_x(&s).0 - general).abs());
    }
    Ok(worst)
}

/// Worst deviation of the initial concurrence of `ρ(a)` from
/// `(2/3)(1 - √(a(1-a)))` over `a = 0, 0.1, ..., 1`, both formulas.
pub fn initial_concurrence() -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..=10 {
        let a = i as f64 / 10.0;
        let expected = 2.0 / 3.0 * (1.0 - (a * (1.0 - a)).sqrt());
        let s = XState::yu_eberly(a)?;
        worst = worst.max((concurrence_x(&s).0 - expected).abs());
        worst = worst.max((concurrence_general(&s.to_matrix())? - expected).abs());
    }
    Ok(worst)
}

/// `c23(t) = c23(0) exp(-2∫Δ)` against the integrated trajectory, with the
/// integral of Δ taken by separate quadrature.
pub fn coherence_law(bath: &BathParams, horizon: f64) -> Result<f64> {
    let model = CoefficientModel::non_markovian(bath, horizon)?;
    let s = XState::yu_eberly(0.0)?;
    let traj = evolve(&s, bath, Mode::NonMarkovian, horizon, 0.5)?;
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let mut worst = 0.0f64;
    let mut integral = 0.0;
    let mut prev = 0.0;
    for (&t, state) in traj.times.iter().zip(&traj.states) {
        if t > prev {
            let f = |u: f64| model.rates(u).map_or(f64::NAN, |r| r.0);
            integral += integrate_panels(f, prev, t, 0.25, opts)?.value;
            prev = t;
        }
        let expected = s.c23.re * (-2.0 * integral).exp();
        worst = worst.max((state.c23 - Complex64::from(expected)).norm());
    }
    Ok(worst)
}

/// Worst trace drift and worst stationary-point residual.
pub fn conservation() -> Result<(f64, f64)> {
    let mut drift = 0.0f64;
    let mut residual = 0.0f64;
    for (r, kt) in [(0.1, 3.0), (1.0, 0.5), (10.0, 30.0), (0.1, 0.0)] {
        let bath = BathParams::ohmic(r, kt)?;
        let traj = evolve(&XState::yu_eberly(0.4)?, &bath, Mode::NonMarkovian, 20.0, 0.5)?;
        drift = drift.max(traj.max_trace_drift);
        let m = markov_limits(&bath);
        let d = rhs(&stationary_state(&bath), m.delta, m.gamma);
        let worst = [d.p11, d.p22, d.p33, d.p44, d.c23.norm(), d.c14.norm()]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        residual = residual.max(worst);
    }
    Ok((drift, residual))
}

pub fn run_validation(cfg: &ValidationConfig) -> ValidationReport {
    let mut checks = Vec::new();
    checks.push(result(
        "kernel_oracle",
        kernel_oracle(cfg.seed, cfg.kernel_points),
        1e-6,
    ));
    let closure = x_closure(cfg.seed);
    checks.push(result(
        "x_closure_off_diagonal",
        closure.clone().map(|c| (c.0, "max |non-X entry|".into())),
        1e-9,
    ));
    checks.push(result(
        "x_closure_agreement",
        closure.map(|c| (c.1, "max |full - X| on X entries".into())),
        1e-7,
    ));
    checks.push(result(
        "fast_path_concurrence",
        fast_path(cfg.seed, cfg.x_states).map(|w| (w, format!("{} random X states", cfg.x_states))),
        1e-10,
    ));
    checks.push(result(
        "initial_concurrence",
        initial_concurrence().map(|w| (w, "a = 0, 0.1, ..., 1".into())),
        1e-12,
    ));
    checks.push(result(
        "coherence_law",
        BathParams::ohmic(0.1, 3.0)
            .and_then(|b| coherence_law(&b, 20.0))
            .map(|w| (w, "kT = 3, r = 0.1, t <= 20".into())),
        1e-7,
    ));
    let cons = conservation();
    checks.push(result(
        "trace_conservation",
        cons.clone().map(|c| (c.0, "max |tr - 1| over accepted steps".into())),
        1e-9,
    ));
    checks.push(result(
        "stationary_residual",
        cons.map(|c| (c.1, "max |rhs| at the stationary state".into())),
        1e-12,
    ));
    ValidationReport {
        config: *cfg,
        checks,
    }
}
