//! X-state evolution under the two-qubit master equation with time-dependent
//! (or Markovian) coefficients, plus a full 4x4 Liouvillian integrator used
//! as a structural check.
//!
//! Basis ordering: `|1> = |ee>`, `|2> = |eg>`, `|3> = |ge>`, `|4> = |gg>`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{markov_limits, BathParams, CoefficientModel, CoefficientSample};
use crate::ode::{solve, OdeOptions};

/// Tolerated negativity of a population in a supplied state.
pub const POPULATION_TOL: f64 = 1e-10;
/// Populations below this during integration abort the run.
pub const NEGATIVE_ABORT: f64 = -1e-8;
/// Tolerance on the trace of a supplied state.
pub const TRACE_TOL: f64 = 1e-9;

/// The six independent entries of an X-shaped two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XState {
    pub p11: f64,
    pub p22: f64,
    pub p33: f64,
    pub p44: f64,
    pub c23: Complex64,
    pub c14: Complex64,
}

impl XState {
    pub fn new(p11: f64, p22: f64, p33: f64, p44: f64, c23: Complex64, c14: Complex64) -> Result<Self> {
        let s = Self {
            p11,
            p22,
            p33,
            p44,
            c23,
            c14,
        };
        s.validate()?;
        Ok(s)
    }

    /// `ρ(a) = (1/3)[a|ee><ee| + (|eg>+|ge>)(<eg|+<ge|) + (1-a)|gg><gg|]`.
    pub fn yu_eberly(a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidState(format!("a must lie in [0, 1], got {a}")));
        }
        let third = 1.0 / 3.0;
        Self::new(
            a / 3.0,
            third,
            third,
            (1.0 - a) / 3.0,
            Complex64::new(third, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    pub fn trace(&self) -> f64 {
        self.p11 + self.p22 + self.p33 + self.p44
    }

    pub fn populations(&self) -> [f64; 4] {
        [self.p11, self.p22, self.p33, self.p44]
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            self.p11,
            self.p22,
            self.p33,
            self.p44,
            self.c23.re,
            self.c23.im,
            self.c14.re,
            self.c14.im,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        if (self.trace() - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {} != 1", self.trace())));
        }
        if let Some((i, p)) = self
            .populations()
            .iter()
            .enumerate()
            .find(|(_, p)| **p < -POPULATION_TOL)
        {
            return Err(Error::InvalidState(format!("p{0}{0} = {p} is negative", i + 1)));
        }
        if self.c23.norm_sqr() > self.p22 * self.p33 + POPULATION_TOL
            || self.c14.norm_sqr() > self.p11 * self.p44 + POPULATION_TOL
        {
            return Err(Error::InvalidState(
                "coherence exceeds the geometric mean of its populations".into(),
            ));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = self.p11.into();
        m[(1, 1)] = self.p22.into();
        m[(2, 2)] = self.p33.into();
        m[(3, 3)] = self.p44.into();
        m[(1, 2)] = self.c23;
        m[(2, 1)] = self.c23.conj();
        m[(0, 3)] = self.c14;
        m[(3, 0)] = self.c14.conj();
        m
    }

    /// Reads the X entries of `m`, ignoring everything else.
    pub fn from_matrix(m: &Matrix4<Complex64>) -> Self {
        Self {
            p11: m[(0, 0)].re,
            p22: m[(1, 1)].re,
            p33: m[(2, 2)].re,
            p44: m[(3, 3)].re,
            c23: m[(1, 2)],
            c14: m[(0, 3)],
        }
    }

    fn to_array(self) -> [f64; 8] {
        [
            self.p11, self.p22, self.p33, self.p44, self.c23.re, self.c23.im, self.c14.re,
            self.c14.im,
        ]
    }

    fn from_array(y: &[f64; 8]) -> Self {
        Self {
            p11: y[0],
            p22: y[1],
            p33: y[2],
            p44: y[3],
            c23: Complex64::new(y[4], y[5]),
            c14: Complex64::new(y[6], y[7]),
        }
    }
}

/// Time derivative of an X state for given `(Δ, γ)`.
pub fn rhs(s: &XState, delta: f64, gamma: f64) -> XState {
    let up = delta - gamma;
    let down = delta + gamma;
    XState {
        p11: -2.0 * down * s.p11 + up * (s.p22 + s.p33),
        p22: down * s.p11 - 2.0 * delta * s.p22 + up * s.p44,
        p33: down * s.p11 - 2.0 * delta * s.p33 + up * s.p44,
        p44: down * (s.p22 + s.p33) - 2.0 * up * s.p44,
        c23: -2.0 * delta * s.c23,
        c14: -2.0 * delta * s.c14,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NonMarkovian,
    Markovian,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::NonMarkovian => "nonmarkov",
            Mode::Markovian => "markov",
        }
    }
}

/// How non-Markovian coefficients are supplied to the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// Evaluate on demand at every stage time.
    Direct,
    /// Tabulate on a uniform grid (default step when `None`) and interpolate.
    Table { step: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    pub coefficients: CoefficientMode,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            coefficients: CoefficientMode::Direct,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<XState>,
    pub coeffs: Vec<CoefficientSample>,
    pub temperature: Vec<f64>,
    /// Largest `|tr ρ - 1|` seen on any accepted step or output.
    pub max_trace_drift: f64,
}

/// `0, grid, 2 grid, ...` up to and including `horizon`.
pub fn output_grid(horizon: f64, grid: f64) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    if !(grid > 0.0) || !grid.is_finite() {
        return Err(Error::InvalidArgument(format!("grid step must be > 0, got {grid}")));
    }
    let ratio = horizon / grid;
    let n = ratio.round();
    let mut times: Vec<f64> = if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
        (0..=n as usize).map(|i| i as f64 * grid).collect()
    } else {
        (0..=ratio.floor() as usize).map(|i| i as f64 * grid).collect()
    };
    let last = times.last_mut().expect("grid contains 0");
    if *last >= horizon - 1e-9 * grid {
        *last = horizon;
    } else {
        times.push(horizon);
    }
    if times.len() == 1 {
        times.push(horizon);
    }
    Ok(times)
}

/// Builds the coefficient provider for a mode.
pub fn coefficient_model(
    bath: &BathParams,
    mode: Mode,
    horizon: f64,
    coefficients: CoefficientMode,
) -> Result<CoefficientModel> {
    match (mode, coefficients) {
        (Mode::Markovian, _) => CoefficientModel::markovian(bath),
        (Mode::NonMarkovian, CoefficientMode::Direct) => {
            CoefficientModel::non_markovian(bath, horizon)
        }
        (Mode::NonMarkovian, CoefficientMode::Table { step }) => {
            let step = step.unwrap_or_else(|| CoefficientModel::default_table_step(bath));
            CoefficientModel::tabulated(bath, horizon, step)
        }
    }
}

pub fn evolve(
    initial: &XState,
    bath: &BathParams,
    mode: Mode,
    horizon: f64,
    grid: f64,
) -> Result<Trajectory> {
    evolve_with(initial, bath, mode, horizon, grid, &EvolveOptions::default())
}

pub fn evolve_with(
    initial: &XState,
    bath: &BathParams,
    mode: Mode,
    horizon: f64,
    grid: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let times = output_grid(horizon, grid)?;
    let model = coefficient_model(bath, mode, horizon, opts.coefficients)?;
    evolve_segments(
        initial,
        &[Segment {
            start: 0.0,
            end: horizon,
            model: &model,
        }],
        &times,
        &opts.ode,
    )
}

/// A time interval with its own coefficient provider.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub start: f64,
    pub end: f64,
    pub model: &'a CoefficientModel,
}

/// Integrates across consecutive segments, carrying the state (and the step
/// size) over each boundary. `times` must start at the first segment's start
/// and end at the last segment's end.
pub fn evolve_segments(
    initial: &XState,
    segments: &[Segment<'_>],
    times: &[f64],
    ode: &OdeOptions,
) -> Result<Trajectory> {
    initial.validate()?;
    let (Some(first), Some(last)) = (segments.first(), segments.last()) else {
        return Err(Error::InvalidArgument("no segments to integrate".into()));
    };
    if times.first() != Some(&first.start) || times.last() != Some(&last.end) {
        return Err(Error::InvalidArgument(
            "output grid must span the segments exactly".into(),
        ));
    }
    for pair in segments.windows(2) {
        if pair[0].end != pair[1].start {
            return Err(Error::InvalidArgument("segments are not contiguous".into()));
        }
    }

    let mut states = Vec::with_capacity(times.len());
    let mut coeffs = Vec::with_capacity(times.len());
    let mut temperature = Vec::with_capacity(times.len());
    let mut drift: f64 = 0.0;
    let mut y = initial.to_array();
    let mut h_init = ode.h_init;
    let mut cursor = 0;

    for (index, seg) in segments.iter().enumerate() {
        let model = seg.model;
        let begin = cursor;
        while cursor < times.len() && times[cursor] <= seg.end {
            cursor += 1;
        }
        let outs = &times[begin..cursor];
        let opts = OdeOptions { h_init, ..*ode };
        let mut check = |t: f64, y: &[f64; 8]| -> Result<()> {
            drift = drift.max((y[0] + y[1] + y[2] + y[3] - 1.0).abs());
            for (i, &p) in y[..4].iter().enumerate() {
                if p < NEGATIVE_ABORT || !p.is_finite() {
                    return Err(Error::NegativePopulation {
                        t,
                        index: i + 1,
                        value: p,
                    });
                }
            }
            Ok(())
        };
        let sol = solve(
            |t, y: &[f64; 8]| {
                let (delta, gamma) = model.rates(t)?;
                Ok(rhs(&XState::from_array(y), delta, gamma).to_array())
            },
            seg.start,
            y,
            seg.end,
            outs,
            &opts,
            &mut check,
        )?;
        for (k, (&t, out)) in outs.iter().zip(&sol.outputs).enumerate() {
            // the very first output is the configured initial state, untouched
            let state = if index == 0 && k == 0 && begin == 0 {
                *initial
            } else {
                XState::from_array(out)
            };
            states.push(state);
            coeffs.push(model.sample(t)?);
            temperature.push(model.bath().kt);
        }
        y = sol.y_end;
        h_init = Some(sol.h_last);
    }

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        coeffs,
        temperature,
        max_trace_drift: drift,
    })
}

/// Stationary state of the X-state equations for the Markovian constants.
pub fn stationary_state(bath: &BathParams) -> XState {
    let zero = Complex64::new(0.0, 0.0);
    if bath.is_zero_temperature() {
        return XState {
            p11: 0.0,
            p22: 0.0,
            p33: 0.0,
            p44: 1.0,
            c23: zero,
            c14: zero,
        };
    }
    let m = markov_limits(bath);
    let (d, g) = (m.delta, m.gamma);
    let denom = 4.0 * d * d;
    let middle = (d - g) * (d + g) / denom;
    XState {
        p11: (d - g) * (d - g) / denom,
        p22: middle,
        p33: middle,
        p44: (d + g) * (d + g) / denom,
        c23: zero,
        c14: zero,
    }
}

/// Full 4x4 density-matrix trajectory.
#[derive(Debug, Clone)]
pub struct MatrixTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Matrix4<Complex64>>,
}

fn lowering_operators() -> [Matrix4<Complex64>; 2] {
    let one = Complex64::new(1.0, 0.0);
    let lower = Matrix2::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), one, Complex64::new(0.0, 0.0));
    let id = Matrix2::<Complex64>::identity();
    [lower.kronecker(&id), id.kronecker(&lower)].map(|m| Matrix4::from_iterator(m.iter().copied()))
}

/// Right-hand side of the full master equation: each qubit relaxes through
/// `σ⁻` at rate `Δ+γ` and is excited through `σ⁺` at rate `Δ-γ`.
pub fn liouvillian(rho: &Matrix4<Complex64>, delta: f64, gamma: f64) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for s in lowering_operators() {
        let sd = s.adjoint();
        for (jump, rate) in [(s, delta + gamma), (sd, delta - gamma)] {
            let jd = jump.adjoint();
            let n = jd * jump;
            let term = jump * rho * jd * Complex64::from(2.0) - n * rho - rho * n;
            out += term * Complex64::from(0.5 * rate);
        }
    }
    out
}

fn pack(m: &Matrix4<Complex64>) -> [f64; 16] {
    let mut y = [0.0; 16];
    let mut k = 4;
    for i in 0..4 {
        y[i] = m[(i, i)].re;
        for j in i + 1..4 {
            y[k] = m[(i, j)].re;
            y[k + 1] = m[(i, j)].im;
            k += 2;
        }
    }
    y
}

fn unpack(y: &[f64; 16]) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    let mut k = 4;
    for i in 0..4 {
        m[(i, i)] = y[i].into();
        for j in i + 1..4 {
            let v = Complex64::new(y[k], y[k + 1]);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
            k += 2;
        }
    }
    m
}

/// Checks Hermiticity, unit trace and positivity within `tol`.
pub fn validate_density_matrix(rho: &Matrix4<Complex64>, tol: f64) -> Result<()> {
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite matrix entry".into()));
    }
    let asym = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > tol {
        return Err(Error::InvalidState(format!("not Hermitian (deviation {asym:e})")));
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::InvalidState(format!("trace {trace} != 1")));
    }
    let hermitian = (rho + rho.adjoint()) * Complex64::from(0.5);
    let min = hermitian
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Integrates the full master equation for an arbitrary two-qubit state.
pub fn evolve_full_liouvillian(
    initial: &Matrix4<Complex64>,
    bath: &BathParams,
    mode: Mode,
    horizon: f64,
    grid: f64,
) -> Result<MatrixTrajectory> {
    validate_density_matrix(initial, TRACE_TOL)?;
    let times = output_grid(horizon, grid)?;
    let model = coefficient_model(bath, mode, horizon, CoefficientMode::Direct)?;
    let sol = solve(
        |t, y: &[f64; 16]| {
            let (delta, gamma) = model.rates(t)?;
            Ok(pack(&liouvillian(&unpack(y), delta, gamma)))
        },
        0.0,
        pack(initial),
        horizon,
        &times,
        &EvolveOptions::default().ode,
        |_, _| Ok(()),
    )?;
    let mut states: Vec<_> = sol.outputs.iter().map(unpack).collect();
    states[0] = *initial;
    Ok(MatrixTrajectory { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn yu_eberly_family() {
        let s = XState::yu_eberly(0.25).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-15);
        assert!(XState::yu_eberly(1.5).is_err());
        assert!(XState::yu_eberly(-0.1).is_err());
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(XState::new(0.5, 0.5, 0.5, 0.0, c(0.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(XState::new(1.1, 0.0, 0.0, -0.1, c(0.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(XState::new(0.0, 0.5, 0.5, 0.0, c(0.6, 0.0), c(0.0, 0.0)).is_err());
        assert!(XState::new(0.0, 0.5, 0.5, 0.0, c(0.0, 0.5), c(0.0, 0.0)).is_ok());
    }

    #[test]
    fn rhs_fixed_points() {
        let zero_coupling = rhs(&XState::yu_eberly(0.3).unwrap(), 0.0, 0.0);
        assert_eq!(zero_coupling.to_array(), [0.0; 8]);
        let ground = XState::new(0.0, 0.0, 0.0, 1.0, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(rhs(&ground, 0.3, 0.3).to_array(), [0.0; 8]);
    }

    #[test]
    fn stationary_state_is_fixed_point() {
        for kt in [0.05, 3.0, 300.0] {
            let bath = BathParams::ohmic(0.1, kt).unwrap();
            let s = stationary_state(&bath);
            assert!((s.trace() - 1.0).abs() < 1e-15);
            let m = markov_limits(&bath);
            let d = rhs(&s, m.delta, m.gamma);
            assert!(d.to_array().iter().all(|v| v.abs() <= 1e-12), "kT = {kt}");
        }
        let cold = stationary_state(&BathParams::ohmic(0.1, 0.0).unwrap());
        assert_eq!(cold.populations(), [0.0, 0.0, 0.0, 1.0]);
        let hot = stationary_state(&BathParams::ohmic(0.1, 1e9).unwrap());
        assert!(hot.populations().iter().all(|p| (p - 0.25).abs() < 1e-9));
    }

    #[test]
    fn output_grid_shapes() {
        assert_eq!(output_grid(1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(output_grid(1.0, 0.3).unwrap().last(), Some(&1.0));
        assert_eq!(output_grid(1.0, 0.3).unwrap().len(), 5);
        assert_eq!(output_grid(0.1, 1.0).unwrap(), vec![0.0, 0.1]);
        assert!(output_grid(0.0, 0.1).is_err());
        assert!(output_grid(1.0, -0.1).is_err());
    }

    #[test]
    fn liouvillian_reproduces_x_equations() {
        let s = XState::new(0.1, 0.2, 0.3, 0.4, c(0.1, 0.05), c(0.02, -0.1)).unwrap();
        let (d, g) = (0.7, 0.2);
        let full = XState::from_matrix(&liouvillian(&s.to_matrix(), d, g));
        let x = rhs(&s, d, g);
        for (a, b) in full.to_array().iter().zip(x.to_array()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pack_round_trip() {
        let s = XState::new(0.1, 0.2, 0.3, 0.4, c(0.1, 0.05), c(0.02, -0.1)).unwrap();
        let m = s.to_matrix();
        assert_eq!(unpack(&pack(&m)), m);
    }

    #[test]
    fn markovian_stationary_start_stays_put() {
        let bath = BathParams::ohmic(0.1, 3.0).unwrap();
        let s = stationary_state(&bath);
        let traj = evolve(&s, &bath, Mode::Markovian, 50.0, 5.0).unwrap();
        for st in &traj.states {
            for (a, b) in st.to_array().iter().zip(s.to_array()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn first_state_is_exact_initial() {
        let bath = BathParams::ohmic(0.1, 3.0).unwrap();
        let s = XState::yu_eberly(0.2).unwrap();
        let traj = evolve(&s, &bath, Mode::NonMarkovian, 2.0, 0.5).unwrap();
        assert_eq!(traj.states[0], s);
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(traj.coeffs.len(), 5);
        assert!(traj.temperature.iter().all(|&k| k == 3.0));
    }
}
