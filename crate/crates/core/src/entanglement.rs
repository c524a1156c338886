//! Concurrence, entanglement of formation, and sudden-death analysis.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, validate_density_matrix, Mode, Trajectory, XState};
use crate::error::{Error, Result};
use crate::kernels::{markov_limits, BathParams};

/// Concurrence values at or below this count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-9;
/// Default dwell window for classifying a zero as a death.
pub const DEFAULT_DWELL: f64 = 1.0;
/// Time resolution of zero-crossing refinement.
pub const CROSSING_RESOLUTION: f64 = 1e-4;

fn spin_flip() -> Matrix4<Complex64> {
    let mut s = Matrix4::zeros();
    s[(0, 3)] = (-1.0).into();
    s[(1, 2)] = 1.0.into();
    s[(2, 1)] = 1.0.into();
    s[(3, 0)] = (-1.0).into();
    s
}

/// Wootters concurrence of an arbitrary two-qubit density matrix.
pub fn concurrence_general(rho: &Matrix4<Complex64>) -> Result<f64> {
    validate_density_matrix(rho, 1e-9)?;
    let hermitian = (rho + rho.adjoint()) * Complex64::from(0.5);
    let eig = hermitian.symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|l| Complex64::from(l.max(0.0).sqrt()));
    let u = &eig.eigenvectors;
    let root = u * Matrix4::from_diagonal(&sqrt_vals) * u.adjoint();
    // singular values of √ρ Σ √ρ* are the square roots of the eigenvalues of ρ Σ ρ* Σ
    let a = root * spin_flip() * root.map(|z| z.conj());
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// `(K₁, K₂)` of an X state.
pub fn k_values(s: &XState) -> (f64, f64) {
    let k1 = s.c23.norm() - (s.p11 * s.p44).max(0.0).sqrt();
    let k2 = s.c14.norm() - (s.p22 * s.p33).max(0.0).sqrt();
    (k1, k2)
}

/// X-state concurrence `max(0, 2K)` with `K = max(K₁, K₂)`; returns `(C, K)`.
pub fn concurrence_x(s: &XState) -> (f64, f64) {
    let (k1, k2) = k_values(s);
    let k = k1.max(k2);
    ((2.0 * k).clamp(0.0, 1.0), k)
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation as a function of concurrence.
pub fn entanglement_of_formation(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    if c == 0.0 {
        return 0.0;
    }
    if c == 1.0 {
        return 1.0;
    }
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceSeries {
    pub times: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub k: Vec<f64>,
    pub concurrence: Vec<f64>,
}

impl ConcurrenceSeries {
    pub fn from_states(times: &[f64], states: &[XState]) -> Self {
        let mut out = Self {
            times: times.to_vec(),
            k1: Vec::with_capacity(states.len()),
            k2: Vec::with_capacity(states.len()),
            k: Vec::with_capacity(states.len()),
            concurrence: Vec::with_capacity(states.len()),
        };
        for s in states {
            let (k1, k2) = k_values(s);
            let (c, k) = concurrence_x(s);
            out.k1.push(k1);
            out.k2.push(k2);
            out.k.push(k);
            out.concurrence.push(c);
        }
        out
    }

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self::from_states(&traj.times, &traj.states)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Cubic interpolation of K through the four samples around `t`.
    fn k_at(&self, t: f64, hint: usize) -> f64 {
        let n = self.len();
        if n < 4 {
            let i = hint.clamp(1, n - 1);
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            let w = (t - t0) / (t1 - t0);
            return self.k[i - 1] * (1.0 - w) + self.k[i] * w;
        }
        let base = hint.saturating_sub(2).min(n - 4);
        let xs = &self.times[base..base + 4];
        let ys = &self.k[base..base + 4];
        let mut v = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    w *= (t - xs[m]) / (xs[j] - xs[m]);
                }
            }
            v += w * ys[j];
        }
        v
    }

    /// Time in `[times[i-1], times[i]]` where `2K` crosses the zero threshold.
    fn crossing(&self, i: usize) -> f64 {
        let (mut lo, mut hi) = (self.times[i - 1], self.times[i]);
        let level = 0.5 * ZERO_THRESHOLD;
        let f = |t: f64| self.k_at(t, i) - level;
        let (flo, fhi) = (f(lo), f(hi));
        if flo.signum() == fhi.signum() {
            // the interpolant missed the sign change; fall back to the midpoint
            return 0.5 * (lo + hi);
        }
        while hi - lo > CROSSING_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ESDReport {
    /// Start of the first zero-concurrence period lasting at least the dwell.
    pub death_time: Option<f64>,
    /// Positive-concurrence intervals after `death_time`. An interval still
    /// open at the horizon ends at the horizon.
    pub revivals: Vec<(f64, f64)>,
    pub final_k: f64,
    pub stationary_k: f64,
}

/// Long-time K of the X-state equations: `-(Δ_M²-γ_M²)/(4Δ_M²)` for kT > 0,
/// 0 at zero temperature.
pub fn stationary_k(bath: &BathParams) -> f64 {
    if bath.is_zero_temperature() {
        return 0.0;
    }
    let m = markov_limits(bath);
    -(m.delta - m.gamma) * (m.delta + m.gamma) / (4.0 * m.delta * m.delta)
}

pub fn analyze_esd(series: &ConcurrenceSeries, bath: &BathParams, dwell: f64) -> ESDReport {
    let stationary_k = stationary_k(bath);
    let Some(&final_k) = series.k.last() else {
        return ESDReport {
            death_time: None,
            revivals: Vec::new(),
            final_k: f64::NAN,
            stationary_k,
        };
    };
    let n = series.len();
    let horizon = series.times[n - 1];
    let zero: Vec<bool> = series.concurrence.iter().map(|&c| c <= ZERO_THRESHOLD).collect();

    // maximal runs of zero samples as (start, end) times
    let mut runs = Vec::new();
    let mut i = 0;
    while i < n {
        if !zero[i] {
            i += 1;
            continue;
        }
        let start = if i == 0 { series.times[0] } else { series.crossing(i) };
        let mut j = i;
        while j + 1 < n && zero[j + 1] {
            j += 1;
        }
        let end = if j + 1 < n { series.crossing(j + 1) } else { horizon };
        runs.push((start, end, j + 1 >= n));
        i = j + 1;
    }

    let death = runs.iter().position(|&(s, e, _)| e - s >= dwell);
    let Some(d) = death else {
        return ESDReport {
            death_time: None,
            revivals: Vec::new(),
            final_k,
            stationary_k,
        };
    };
    let mut revivals = Vec::new();
    for w in d..runs.len() {
        let (_, end, open) = runs[w];
        if open {
            break;
        }
        let next_start = runs.get(w + 1).map_or(horizon, |r| r.0);
        revivals.push((end, next_start));
    }
    ESDReport {
        death_time: Some(runs[d].0),
        revivals,
        final_k,
        stationary_k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiOptions {
    pub grid: f64,
    pub dwell: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub tol: f64,
}

impl Default for XiOptions {
    fn default() -> Self {
        Self {
            grid: 0.05,
            dwell: DEFAULT_DWELL,
            tol: 1e-3,
        }
    }
}

/// Whether `ρ(a)` dies within `horizon` at zero temperature.
pub fn dies_at_zero_temperature(bath: &BathParams, a: f64, horizon: f64, opts: &XiOptions) -> Result<bool> {
    let cold = bath.with_temperature(0.0);
    let traj = evolve(&XState::yu_eberly(a)?, &cold, Mode::NonMarkovian, horizon, opts.grid)?;
    let report = analyze_esd(&ConcurrenceSeries::from_trajectory(&traj), &cold, opts.dwell);
    Ok(report.death_time.is_some())
}

pub fn estimate_xi(bath: &BathParams, a_grid: &[f64], horizon: f64) -> Result<f64> {
    estimate_xi_with(bath, a_grid, horizon, &XiOptions::default())
}

/// Threshold in `a` separating finite-time death (above) from asymptotic
/// decay (below) at zero temperature, by bisection inside the grid bracket.
pub fn estimate_xi_with(bath: &BathParams, a_grid: &[f64], horizon: f64, opts: &XiOptions) -> Result<f64> {
    let mut grid = a_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let (Some(&first), Some(&last)) = (grid.first(), grid.last()) else {
        return Err(Error::InvalidArgument("empty a grid".into()));
    };
    if grid.len() < 2 {
        return Err(Error::InconclusiveThreshold { lo: first, hi: last });
    }
    let verdicts = grid
        .iter()
        .map(|&a| dies_at_zero_temperature(bath, a, horizon, opts))
        .collect::<Result<Vec<bool>>>()?;
    let Some(flip) = verdicts.iter().position(|&v| v) else {
        return Err(Error::InconclusiveThreshold { lo: first, hi: last });
    };
    if flip == 0 {
        return Err(Error::InconclusiveThreshold { lo: first, hi: last });
    }
    if let Some(back) = verdicts[flip..].iter().position(|&v| !v) {
        return Err(Error::InconclusiveThreshold {
            lo: grid[flip + back - 1],
            hi: grid[flip + back],
        });
    }
    let (mut lo, mut hi) = (grid[flip - 1], grid[flip]);
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if dies_at_zero_temperature(bath, mid, horizon, opts)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
