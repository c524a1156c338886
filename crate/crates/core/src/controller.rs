//! Open-loop temperature modulation `kT = kT₀ exp(-α |Δ - γ|)`.
//!
//! The temperature is piecewise constant on intervals of length
//! `update_step`. The value for `[t_k, t_k+1)` is computed from `Δ(t_k)`,
//! `γ(t_k)` evaluated at the previous interval's temperature, so the schedule
//! depends only on the configuration, never on the state.

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_segments, output_grid, Segment, Trajectory, XState, EvolveOptions};
use crate::error::{Error, Result};
use crate::kernels::{BathParams, CoefficientModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub alpha: f64,
    pub kt0: f64,
    pub update_step: f64,
    /// Use `|Δ|` instead of `|Δ - γ|` in the exponent.
    pub neglect_gamma: bool,
}

impl ControllerConfig {
    pub fn new(alpha: f64, kt0: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            kt0,
            update_step: 0.1,
            neglect_gamma: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha >= 0.0
            && self.kt0 > 0.0
            && self.update_step > 0.0
            && self.alpha.is_finite()
            && self.kt0.is_finite()
            && self.update_step.is_finite()
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "controller needs alpha >= 0, kT0 > 0, update_step > 0 (got {self:?})"
            )))
        }
    }
}

pub fn controlled_temperature(delta: f64, gamma: f64, cfg: &ControllerConfig) -> f64 {
    let gap = if cfg.neglect_gamma {
        delta.abs()
    } else {
        (delta - gamma).abs()
    };
    cfg.kt0 * (-cfg.alpha * gap).exp()
}

/// A maximal run of update intervals sharing one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub start: f64,
    pub end: f64,
    pub kt: f64,
}

/// Temperature schedule over `[0, horizon]`, consecutive equal temperatures
/// merged.
pub fn temperature_schedule(bath: &BathParams, cfg: &ControllerConfig, horizon: f64) -> Result<Vec<ScheduleSegment>> {
    cfg.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let base = bath.with_temperature(cfg.kt0);
    base.validate()?;
    let mut segments: Vec<ScheduleSegment> = Vec::new();
    let mut kt = cfg.kt0;
    let mut model = CoefficientModel::non_markovian(&base, 0.0)?;
    let mut k: u64 = 0;
    loop {
        let start = k as f64 * cfg.update_step;
        if start >= horizon {
            break;
        }
        if k > 0 {
            let (delta, gamma) = model.rates(start)?;
            let next = controlled_temperature(delta, gamma, cfg);
            if next != kt {
                kt = next;
                model = CoefficientModel::non_markovian(&base.with_temperature(kt), 0.0)?;
            }
        }
        let end = ((k + 1) as f64 * cfg.update_step).min(horizon);
        match segments.last_mut() {
            Some(last) if last.kt == kt => last.end = end,
            _ => segments.push(ScheduleSegment { start, end, kt }),
        }
        k += 1;
    }
    if let Some(last) = segments.last_mut() {
        last.end = horizon;
    }
    Ok(segments)
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlledRun {
    pub trajectory: Trajectory,
    pub schedule: Vec<ScheduleSegment>,
}

pub fn evolve_controlled(
    initial: &XState,
    bath: &BathParams,
    cfg: &ControllerConfig,
    horizon: f64,
    grid: f64,
) -> Result<ControlledRun> {
    evolve_controlled_with(initial, bath, cfg, horizon, grid, &EvolveOptions::default())
}

/// Integrates with the coefficients of each schedule segment; `Δ(t)` keeps
/// its elapsed-time argument across temperature changes.
pub fn evolve_controlled_with(
    initial: &XState,
    bath: &BathParams,
    cfg: &ControllerConfig,
    horizon: f64,
    grid: f64,
    opts: &EvolveOptions,
) -> Result<ControlledRun> {
    let schedule = temperature_schedule(bath, cfg, horizon)?;
    let times = output_grid(horizon, grid)?;
    let models = schedule
        .iter()
        .map(|s| CoefficientModel::non_markovian(&bath.with_temperature(s.kt), horizon))
        .collect::<Result<Vec<_>>>()?;
    let segments: Vec<Segment<'_>> = schedule
        .iter()
        .zip(&models)
        .map(|(s, model)| Segment {
            start: s.start,
            end: s.end,
            model,
        })
        .collect();
    let trajectory = evolve_segments(initial, &segments, &times, &opts.ode)?;
    Ok(ControlledRun { trajectory, schedule })
}
