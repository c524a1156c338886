//! Time-dependent diffusion `Δ(t)` and damping `γ(t)` coefficients of the
//! two-qubit master equation for an Ohmic bath with a Lorentz-Drude cutoff.
//!
//! Three routes are provided:
//!
//! * closed forms (`gamma_closed`, `delta_closed`), the production path for
//!   `kT > 0`; `Δ(t)` is a Matsubara resummation written with the reduced
//!   hypergeometric series from [`crate::special_fn`];
//! * an independent quadrature of the defining kernel integrals
//!   (`delta_quadrature`, `gamma_quadrature`), which is also the only route
//!   at zero temperature and for `t` below the switchover time;
//! * the Markovian constants (`markov_limits`).
//!
//! Kernel normalization: with `J(ω) = (2/π) ω ω_c²/(ω_c²+ω²)` the closed forms
//! correspond to `k(τ) = ∫ J(ω) coth(ω/2kT) cos(ωτ) dω` and
//! `μ(τ) = ∫ J(ω) sin(ωτ) dω`, and this is what the quadrature integrates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_panels, QuadOptions};
use crate::special_fn::{fbar_at, gbar_at, scaled_e1, scaled_ei, SeriesOptions};

/// Temperatures below `KT_FLOOR * omega0` are treated as zero.
pub const KT_FLOOR: f64 = 1e-6;
/// Switchover `t_min = T_MIN_FACTOR / nu1` below which the closed form defers
/// to quadrature.
pub const T_MIN_FACTOR: f64 = 1e-3;
/// Maximum relative imaginary residue tolerated in the closed-form `Δ(t)`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;
/// Distance from an integer `r_c` inside which the cotangent pole is
/// cancelled analytically against the matching series term.
const POLE_GUARD: f64 = 1e-3;

/// Bath and coupling parameters, all in units where `hbar = k_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// System frequency `ω₀`.
    pub omega0: f64,
    /// Cutoff ratio `ω_c / ω₀`.
    pub r: f64,
    /// Temperature `k_B T`.
    pub kt: f64,
    /// Overall squared coupling `α²`, multiplies both coefficients.
    pub coupling2: f64,
}

impl BathParams {
    pub fn new(omega0: f64, r: f64, kt: f64, coupling2: f64) -> Result<Self> {
        let bath = Self {
            omega0,
            r,
            kt,
            coupling2,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// `ω₀ = 1`, unit coupling.
    pub fn ohmic(r: f64, kt: f64) -> Result<Self> {
        Self::new(1.0, r, kt, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega0 > 0.0
            && self.r > 0.0
            && self.kt >= 0.0
            && self.coupling2 > 0.0
            && self.omega0.is_finite()
            && self.r.is_finite()
            && self.kt.is_finite()
            && self.coupling2.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidBath(format!(
                "need omega0 > 0, r > 0, kT >= 0, coupling2 > 0 (got {self:?})"
            )))
        }
    }

    pub fn with_temperature(&self, kt: f64) -> Self {
        Self { kt, ..*self }
    }

    pub fn omega_c(&self) -> f64 {
        self.r * self.omega0
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.kt < KT_FLOOR * self.omega0
    }

    /// First Matsubara frequency `ν₁ = 2π kT`, `None` at zero temperature.
    pub fn nu1(&self) -> Option<f64> {
        (!self.is_zero_temperature()).then_some(2.0 * PI * self.kt)
    }

    /// Closed-form switchover time; zero temperature has no closed form, so
    /// every `t` is below it.
    pub fn t_min(&self) -> f64 {
        match self.nu1() {
            Some(nu1) => T_MIN_FACTOR / nu1,
            None => f64::INFINITY,
        }
    }

    /// `α² ω₀ r²/(1+r²)`, the Markovian damping rate.
    pub fn rate_scale(&self) -> f64 {
        self.coupling2 * self.omega0 * self.r * self.r / (1.0 + self.r * self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    HighTApprox,
    Markovian,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::HighTApprox => "high_t_approx",
            Method::Markovian => "markovian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSample {
    pub t: f64,
    pub delta: f64,
    pub gamma: f64,
    pub method: Method,
}

/// Ohmic spectral density with Lorentz-Drude cutoff, scaled by `coupling2`.
pub fn spectral_density(omega: f64, bath: &BathParams) -> f64 {
    let wc = bath.omega_c();
    bath.coupling2 * 2.0 / PI * omega * wc * wc / (wc * wc + omega * omega)
}

/// Closed-form damping coefficient; independent of temperature.
pub fn gamma_closed(t: f64, bath: &BathParams) -> f64 {
    let w0t = bath.omega0 * t;
    let decay = (-bath.r * w0t).exp();
    bath.rate_scale() * (1.0 - decay * w0t.cos() - bath.r * decay * w0t.sin())
}

/// `cot(x) - 1/x` for small `|x|`.
fn cot_minus_pole(x: f64) -> f64 {
    let x2 = x * x;
    -x / 3.0 * (1.0 + x2 / 15.0 * (1.0 + 2.0 * x2 / 21.0))
}

/// Closed-form diffusion coefficient for `kT > 0` and `t >= t_min`.
pub fn delta_closed(t: f64, bath: &BathParams) -> Result<f64> {
    bath.validate()?;
    let Some(nu1) = bath.nu1() else {
        return Err(Error::SingularLimit(
            "closed-form Δ(t) is undefined at zero temperature".into(),
        ));
    };
    if !(t >= bath.t_min()) {
        return Err(Error::SingularLimit(format!(
            "t = {t} is below the closed-form switchover t_min = {}",
            bath.t_min()
        )));
    }
    let opts = SeriesOptions::default();
    let r = bath.r;
    let r0 = bath.omega0 / nu1;
    let rc = bath.omega_c() / nu1;
    let z = (-nu1 * t).exp();

    let nearest = rc.round();
    let offset = rc - nearest;
    let pole = (nearest >= 1.0 && offset.abs() < POLE_GUARD).then_some(nearest as usize);

    let i = Complex64::new(0.0, 1.0);
    let f_minus = fbar_at(Complex64::new(-rc, 0.0), z, pole, opts)?;
    let f_plus = fbar_at(Complex64::new(rc, 0.0), z, None, opts)?;
    let f_i = fbar_at(i * r0, z, None, opts)?;
    let f_mi = fbar_at(-i * r0, z, None, opts)?;
    let g_i = gbar_at(i * r0, z, None, opts)?;
    let g_mi = gbar_at(-i * r0, z, None, opts)?;

    let (s, c) = (bath.omega0 * t).sin_cos();
    let osc = r * c - s;
    let decay = (-bath.omega_c() * t).exp();

    let f_sum = f_minus + f_plus - f_i - f_mi;
    let f_diff = f_minus - f_plus;
    let g_term = z / (2.0 * r0 * (1.0 + r0 * r0)) * ((r0 - i) * g_mi + (r0 + i) * g_i);

    let cot = match pole {
        Some(_) => cot_minus_pole(PI * offset),
        None => 1.0 / (PI * rc).tan(),
    };
    let mut bracket = Complex64::new(1.0 / (PI * r0).tanh() - cot * decay * osc, 0.0)
        + c / (PI * r0) * f_sum
        - 2.0 / PI * s * (g_term + f_diff / (2.0 * rc));
    if let Some(n) = pole {
        // The 1/(r_c - n) pieces of the cotangent and of the skipped series
        // term combine into a divided difference of z^x at x = n, r_c.
        let divided = if offset == 0.0 {
            nu1 * t
        } else {
            -(-offset * nu1 * t).exp_m1() / offset
        };
        bracket += osc * z.powi(n as i32) * divided / PI;
    }

    let scale = bracket.re.abs().max(1.0 / (PI * r0).tanh());
    let residue = bracket.im.abs() / scale;
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { t, residue });
    }
    Ok(bath.rate_scale() * bracket.re)
}

/// Leading classical (high-temperature) approximation of `Δ(t)`, from
/// `coth(ω/2kT) ≈ 2kT/ω`.
pub fn delta_high_temperature(t: f64, bath: &BathParams) -> f64 {
    let wc = bath.omega_c();
    let w0 = bath.omega0;
    let (s, c) = (w0 * t).sin_cos();
    bath.coupling2 * 2.0 * bath.kt * wc * (wc - (-wc * t).exp() * (wc * c - w0 * s))
        / (wc * wc + w0 * w0)
}

/// Zero-temperature noise kernel `k₀(τ) = ∫ J(ω) cos(ωτ) dω` (without the
/// coupling factor), via exponential integrals.
fn vacuum_kernel(tau: f64, bath: &BathParams) -> f64 {
    let wc = bath.omega_c();
    let x = wc * tau;
    wc * wc / PI * (scaled_e1(x) - scaled_ei(x))
}

fn quad_options(scale: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14 * scale.max(1e-300),
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

/// `∫_a^b k₀(τ) cos(ω₀τ) dτ` (without the coupling factor).
fn vacuum_delta_increment(a: f64, b: f64, bath: &BathParams) -> Result<f64> {
    let w0 = bath.omega0;
    let width = 0.5 * PI / w0.max(bath.omega_c());
    let f = |tau: f64| vacuum_kernel(tau, bath) * (w0 * tau).cos();
    Ok(integrate_panels(f, a, b, width, quad_options(bath.omega_c() * bath.omega_c()))?.value)
}

/// `(sin((ω-ω₀)t)/(ω-ω₀) + sin((ω+ω₀)t)/(ω+ω₀)) / 2`, the τ-integral of
/// `cos(ωτ) cos(ω₀τ)` over `[0, t]`.
fn cosine_window(omega: f64, t: f64, w0: f64) -> f64 {
    let d = omega - w0;
    let u = d * t;
    let minus = if u.abs() < 1e-4 {
        t * (1.0 - u * u / 6.0 * (1.0 - u * u / 20.0))
    } else {
        u.sin() / d
    };
    0.5 * (minus + ((omega + w0) * t).sin() / (omega + w0))
}

/// Thermal excess `∫ J(ω) (coth(ω/2kT) - 1) W(ω, t) dω` (without coupling).
fn thermal_delta(t: f64, bath: &BathParams) -> Result<f64> {
    let kt = bath.kt;
    let wc = bath.omega_c();
    let w0 = bath.omega0;
    let omega_max = 40.0 * kt;
    // (2/π) ω_c²/(ω_c²+ω²) · 2ω/(e^{ω/kT}-1)
    let f = |omega: f64| {
        let bose = if omega == 0.0 {
            kt
        } else {
            omega / (omega / kt).exp_m1()
        };
        4.0 / PI * wc * wc / (wc * wc + omega * omega) * bose * cosine_window(omega, t, w0)
    };
    let mut width = omega_max / 8.0;
    if t > 0.0 {
        width = width.min(PI / t);
    }
    let scale = kt * t.max(1e-300);
    Ok(integrate_panels(f, 0.0, omega_max, width, quad_options(scale))?.value)
}

/// `Δ(t)` by quadrature of the defining kernel integrals; valid for all
/// `kT >= 0` (zero temperature uses `coth -> 1`).
pub fn delta_quadrature(t: f64, bath: &BathParams) -> Result<f64> {
    bath.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut total = vacuum_delta_increment(0.0, t, bath)?;
    if !bath.is_zero_temperature() {
        total += thermal_delta(t, bath)?;
    }
    Ok(bath.coupling2 * total)
}

/// `γ(t) = ∫₀ᵗ μ(τ) sin(ω₀τ) dτ` by quadrature, with the dissipation kernel
/// `μ(τ) = ω_c² e^{-ω_c τ}`.
pub fn gamma_quadrature(t: f64, bath: &BathParams) -> Result<f64> {
    bath.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let wc = bath.omega_c();
    let w0 = bath.omega0;
    let f = |tau: f64| wc * wc * (-wc * tau).exp() * (w0 * tau).sin();
    let width = 0.5 * PI / w0.max(wc);
    let r = integrate_panels(f, 0.0, t, width, quad_options(wc * wc))?;
    Ok(bath.coupling2 * r.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovLimits {
    pub delta: f64,
    pub gamma: f64,
}

/// Long-time constants `Δ_M = γ_M coth(ω₀/2kT)`, `γ_M = α² ω₀ r²/(1+r²)`.
pub fn markov_limits(bath: &BathParams) -> MarkovLimits {
    let gamma = bath.rate_scale();
    let delta = if bath.is_zero_temperature() {
        gamma
    } else {
        gamma / (bath.omega0 / (2.0 * bath.kt)).tanh()
    };
    MarkovLimits { delta, gamma }
}

/// Zero-temperature `Δ(t)`: cumulative quadrature on a uniform grid plus an
/// on-demand partial panel.
#[derive(Debug, Clone)]
pub struct ZeroTemperatureDelta {
    bath: BathParams,
    step: f64,
    cumulative: Vec<f64>,
}

impl ZeroTemperatureDelta {
    pub fn build(bath: &BathParams, horizon: f64) -> Result<Self> {
        bath.validate()?;
        let step = 0.1 / bath.omega0.max(bath.omega_c());
        let nodes = (horizon.max(0.0) / step).ceil() as usize + 1;
        let mut cumulative = Vec::with_capacity(nodes + 1);
        cumulative.push(0.0);
        for i in 1..=nodes {
            let a = step * (i - 1) as f64;
            let b = step * i as f64;
            let prev = cumulative[i - 1];
            cumulative.push(prev + vacuum_delta_increment(a, b, bath)?);
        }
        Ok(Self {
            bath: *bath,
            step,
            cumulative,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let last = self.cumulative.len() - 1;
        let i = ((t / self.step).floor() as usize).min(last);
        let node = self.step * i as f64;
        let partial = if t > node {
            let f = |tau: f64| vacuum_kernel(tau, &self.bath) * (self.bath.omega0 * tau).cos();
            let scale = self.bath.omega_c() * self.bath.omega_c();
            if t - node <= self.step {
                integrate(f, node, t, quad_options(scale))?.value
            } else {
                vacuum_delta_increment(node, t, &self.bath)?
            }
        } else {
            0.0
        };
        Ok(self.bath.coupling2 * (self.cumulative[i] + partial))
    }
}

/// How the dynamics obtains `Δ(t)`, `γ(t)`.
#[derive(Debug, Clone)]
enum Source {
    Markovian(MarkovLimits),
    Direct,
    ZeroTemperature(ZeroTemperatureDelta),
    Table(CoefficientTable),
}

/// Coefficient provider used by the integrators. Immutable once built, so a
/// single instance can be shared between threads.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    bath: BathParams,
    source: Source,
}

impl CoefficientModel {
    /// Constant Markovian coefficients.
    pub fn markovian(bath: &BathParams) -> Result<Self> {
        bath.validate()?;
        Ok(Self {
            bath: *bath,
            source: Source::Markovian(markov_limits(bath)),
        })
    }

    /// Time-dependent coefficients evaluated on demand. `horizon` sizes the
    /// zero-temperature cumulative table; evaluation beyond it still works.
    pub fn non_markovian(bath: &BathParams, horizon: f64) -> Result<Self> {
        bath.validate()?;
        let source = if bath.is_zero_temperature() {
            Source::ZeroTemperature(ZeroTemperatureDelta::build(bath, horizon)?)
        } else {
            Source::Direct
        };
        Ok(Self {
            bath: *bath,
            source,
        })
    }

    /// Time-dependent coefficients tabulated on a uniform grid and
    /// interpolated with local cubics.
    pub fn tabulated(bath: &BathParams, horizon: f64, step: f64) -> Result<Self> {
        let direct = Self::non_markovian(bath, horizon)?;
        let table = CoefficientTable::build(&direct, horizon, step)?;
        Ok(Self {
            bath: *bath,
            source: Source::Table(table),
        })
    }

    /// Default table step `1e-3/ω₀ · min(1, 1/r)`.
    pub fn default_table_step(bath: &BathParams) -> f64 {
        1e-3 / bath.omega0 * (1.0f64).min(1.0 / bath.r)
    }

    pub fn bath(&self) -> &BathParams {
        &self.bath
    }

    pub fn is_markovian(&self) -> bool {
        matches!(self.source, Source::Markovian(_))
    }

    pub fn sample(&self, t: f64) -> Result<CoefficientSample> {
        match &self.source {
            Source::Markovian(m) => Ok(CoefficientSample {
                t,
                delta: m.delta,
                gamma: m.gamma,
                method: Method::Markovian,
            }),
            Source::ZeroTemperature(table) => Ok(CoefficientSample {
                t,
                delta: table.eval(t)?,
                gamma: gamma_closed(t, &self.bath),
                method: Method::Quadrature,
            }),
            Source::Direct => {
                let gamma = gamma_closed(t, &self.bath);
                let (delta, method) = if t <= 0.0 {
                    (0.0, Method::Quadrature)
                } else if t < self.bath.t_min() {
                    (delta_quadrature(t, &self.bath)?, Method::Quadrature)
                } else {
                    match delta_closed(t, &self.bath) {
                        Ok(d) => (d, Method::ClosedForm),
                        Err(Error::NonConvergence { .. }) => {
                            (delta_quadrature(t, &self.bath)?, Method::Quadrature)
                        }
                        Err(e) => return Err(e),
                    }
                };
                Ok(CoefficientSample {
                    t,
                    delta,
                    gamma,
                    method,
                })
            }
            Source::Table(table) => table.sample(t),
        }
    }

    /// `(Δ, γ)` only.
    pub fn rates(&self, t: f64) -> Result<(f64, f64)> {
        let s = self.sample(t)?;
        Ok((s.delta, s.gamma))
    }
}

#[derive(Debug, Clone)]
struct CoefficientTable {
    step: f64,
    delta: Vec<f64>,
    gamma: Vec<f64>,
}

impl CoefficientTable {
    fn build(direct: &CoefficientModel, horizon: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "table needs positive step and horizon (step = {step}, horizon = {horizon})"
            )));
        }
        // two extra nodes so the last interval still has a 4-point stencil
        let n = (horizon / step).ceil() as usize + 3;
        let mut delta = Vec::with_capacity(n);
        let mut gamma = Vec::with_capacity(n);
        for i in 0..n {
            let s = direct.sample(step * i as f64)?;
            delta.push(s.delta);
            gamma.push(s.gamma);
        }
        Ok(Self { step, delta, gamma })
    }

    fn sample(&self, t: f64) -> Result<CoefficientSample> {
        let n = self.delta.len();
        let x = t / self.step;
        if !(x >= 0.0) || x > (n - 1) as f64 {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside the tabulated range"
            )));
        }
        let i = (x.floor() as usize).clamp(1, n - 3);
        let base = i - 1;
        let u = x - base as f64;
        // Lagrange weights on nodes base..base+3 at offset u
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        let interp = |v: &[f64]| (0..4).map(|k| w[k] * v[base + k]).sum::<f64>();
        Ok(CoefficientSample {
            t,
            delta: interp(&self.delta),
            gamma: interp(&self.gamma),
            method: Method::ClosedForm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(r: f64, kt: f64) -> BathParams {
        BathParams::ohmic(r, kt).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let b = bath(1.0, 1.0);
        assert_eq!(spectral_density(0.0, &b), 0.0);
        assert!((spectral_density(1.0, &b) - 1.0 / PI).abs() < 1e-15);
        // ω = 3, ω_c = 1: 0.6/π
        assert!((spectral_density(3.0, &b) - 0.190_985_931_710_274_4).abs() < 1e-15);
    }

    #[test]
    fn gamma_closed_values() {
        let b = bath(0.1, 1.0);
        assert_eq!(gamma_closed(0.0, &b), 0.0);
        assert!((gamma_closed(1e4, &b) - 0.01 / 1.01).abs() < 1e-15);
        let b1 = bath(1.0, 1.0);
        assert!((gamma_closed(PI, &b1) - 0.521_606_959_131_886_1).abs() < 1e-14);
    }

    #[test]
    fn gamma_is_temperature_independent() {
        for t in [0.1, 1.0, 7.5] {
            assert_eq!(
                gamma_closed(t, &bath(0.3, 0.01)).to_bits(),
                gamma_closed(t, &bath(0.3, 300.0)).to_bits()
            );
        }
    }

    #[test]
    fn delta_closed_rejects_singular_inputs() {
        assert!(matches!(
            delta_closed(1.0, &bath(0.1, 0.0)),
            Err(Error::SingularLimit(_))
        ));
        let b = bath(0.1, 3.0);
        assert!(matches!(
            delta_closed(0.5 * b.t_min(), &b),
            Err(Error::SingularLimit(_))
        ));
    }

    #[test]
    fn delta_closed_long_time_limits() {
        for kt in [0.05, 3.0, 300.0] {
            let b = bath(0.1, kt);
            let m = markov_limits(&b);
            let d = delta_closed(2000.0, &b).unwrap();
            assert!(((d - m.delta) / m.delta).abs() < 1e-12, "kT = {kt}");
        }
    }

    #[test]
    fn delta_closed_matches_quadrature_near_integer_cutoff() {
        // r_c = ω_c / 2πkT sits right on (and near) the cotangent pole
        for offset in [0.0, 1e-9, -3e-5, 4e-4] {
            let kt = 1.0 / (2.0 * PI * (1.0 + offset));
            let b = bath(1.0, kt);
            for t in [0.3, 2.0] {
                let closed = delta_closed(t, &b).unwrap();
                let quad = delta_quadrature(t, &b).unwrap();
                assert!(
                    (closed - quad).abs() < 1e-9,
                    "offset {offset}, t {t}: {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn quadrature_is_zero_at_origin() {
        let b = bath(0.1, 3.0);
        assert_eq!(delta_quadrature(0.0, &b).unwrap(), 0.0);
        assert_eq!(gamma_quadrature(0.0, &b).unwrap(), 0.0);
    }

    #[test]
    fn gamma_quadrature_matches_closed_form() {
        let b = bath(1.0, 1.0);
        let q = gamma_quadrature(PI, &b).unwrap();
        assert!((q - 0.521_606_959_131_886_1).abs() < 1e-12);
        let b = bath(0.1, 1.0);
        let q = gamma_quadrature(200.0, &b).unwrap();
        assert!((q - gamma_closed(200.0, &b)).abs() < 1e-12);
    }

    #[test]
    fn markov_limit_values() {
        let m = markov_limits(&bath(0.1, 1.0));
        assert!((m.gamma - 0.009_900_990_099_009_9).abs() < 1e-15);
        let hot = markov_limits(&bath(0.1, 300.0));
        assert!((hot.delta - 0.01 / 1.01 / (1.0f64 / 600.0).tanh()).abs() < 1e-12);
        assert!((hot.delta - 5.9406).abs() < 1e-3);
        let cold = markov_limits(&bath(0.1, 1e-9));
        assert_eq!(cold.delta, cold.gamma);
        let chilly = markov_limits(&bath(0.1, 0.01));
        assert!(chilly.delta >= chilly.gamma);
    }

    #[test]
    fn zero_temperature_delta_approaches_gamma_markov() {
        let b = bath(0.1, 0.0);
        let z = ZeroTemperatureDelta::build(&b, 400.0).unwrap();
        let m = markov_limits(&b);
        let d = z.eval(400.0).unwrap();
        assert!(((d - m.gamma) / m.gamma).abs() < 2e-3, "{d}");
        // the partial panel agrees with a direct quadrature
        let t = 12.345;
        let direct = delta_quadrature(t, &b).unwrap();
        assert!((z.eval(t).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn high_temperature_form_limit() {
        let b = bath(0.1, 300.0);
        let v = delta_high_temperature(1e4, &b);
        assert!((v - 2.0 * 300.0 * 0.01 / 1.01).abs() < 1e-9);
    }

    #[test]
    fn low_temperature_delta_goes_negative() {
        // Δ(t) is not clamped: for r = 0.1, kT = 0.1 it dips below zero
        // around t = 3π/2, where the thermal excess is weighted by sin(ω₀t)
        let b = bath(0.1, 0.1);
        let model = CoefficientModel::non_markovian(&b, 10.0).unwrap();
        let (min, at) = (1..400)
            .map(|i| i as f64 * 0.025)
            .map(|t| (model.sample(t).unwrap().delta, t))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        assert!(min < 0.0, "min Δ = {min}");
        let quad = delta_quadrature(at, &b).unwrap();
        assert!((quad - min).abs() < 1e-10);
    }

    #[test]
    fn table_mode_tracks_direct_evaluation() {
        let b = bath(0.1, 3.0);
        let direct = CoefficientModel::non_markovian(&b, 5.0).unwrap();
        let table = CoefficientModel::tabulated(&b, 5.0, 1e-3).unwrap();
        for t in [0.01234, 0.5, 1.7, 4.9] {
            let a = direct.sample(t).unwrap();
            let b = table.sample(t).unwrap();
            assert!((a.delta - b.delta).abs() < 1e-8, "t = {t}");
            assert!((a.gamma - b.gamma).abs() < 1e-12);
        }
    }
}
