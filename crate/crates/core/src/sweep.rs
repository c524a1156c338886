//! Batch execution over parameter grids.
//!
//! Every scenario is a cross product of parameter axes plus a time axis.
//! Points are independent; with the `parallel` feature they run on a rayon
//! pool, and results are assembled in grid order either way.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controller::{evolve_controlled_with, ControllerConfig};
use crate::dynamics::{coefficient_model, evolve_with, output_grid, CoefficientMode, EvolveOptions, Mode, XState};
use crate::entanglement::{analyze_esd, entanglement_of_formation, ConcurrenceSeries, ESDReport};
use crate::error::{Error, Result};
use crate::kernels::{markov_limits, BathParams};
use crate::ode::OdeOptions;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Coefficients,
    ConcurrenceVsA,
    KTrace,
    ConcurrenceVsTemp,
    Controlled,
    MarkovCompare,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Coefficients,
        Scenario::ConcurrenceVsA,
        Scenario::KTrace,
        Scenario::ConcurrenceVsTemp,
        Scenario::Controlled,
        Scenario::MarkovCompare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Coefficients => "coefficients",
            Scenario::ConcurrenceVsA => "concurrence_vs_a",
            Scenario::KTrace => "k_trace",
            Scenario::ConcurrenceVsTemp => "concurrence_vs_temp",
            Scenario::Controlled => "controlled",
            Scenario::MarkovCompare => "markov_compare",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::SpecError(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub omega0: f64,
    pub coupling2: f64,
    pub r: Vec<f64>,
    pub kt: Vec<f64>,
    pub a: Vec<f64>,
    pub alpha: Vec<f64>,
    pub modes: Vec<Mode>,
    pub horizon: f64,
    pub grid: f64,
    pub dwell: f64,
    pub update_step: f64,
    pub neglect_gamma: bool,
    pub coefficients: CoefficientMode,
    pub atol: f64,
    pub rtol: f64,
}

impl SweepSpec {
    /// Single-point spec with the library defaults.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            omega0: 1.0,
            coupling2: 1.0,
            r: vec![0.1],
            kt: vec![3.0],
            a: vec![0.0],
            alpha: vec![0.0],
            modes: vec![Mode::NonMarkovian],
            horizon: 50.0,
            grid: 0.05,
            dwell: crate::entanglement::DEFAULT_DWELL,
            update_step: 0.1,
            neglect_gamma: false,
            coefficients: CoefficientMode::Direct,
            atol: 1e-10,
            rtol: 1e-8,
        }
    }

    fn modes(&self) -> Vec<Mode> {
        match self.scenario {
            Scenario::MarkovCompare => vec![Mode::NonMarkovian, Mode::Markovian],
            _ => self.modes.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::SpecError(m));
        let nonempty = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::SpecError(format!("range '{name}' is empty")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::SpecError(format!("range '{name}' has a non-finite value")));
            }
            Ok(())
        };
        nonempty("r", &self.r)?;
        nonempty("kt", &self.kt)?;
        if self.scenario != Scenario::Coefficients {
            nonempty("a", &self.a)?;
            if self.a.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return fail("a values must lie in [0, 1]".into());
            }
            if self.modes().is_empty() {
                return fail("no evolution mode selected".into());
            }
        }
        if self.scenario == Scenario::Controlled {
            nonempty("alpha", &self.alpha)?;
            if self.alpha.iter().any(|&x| x < 0.0) {
                return fail("alpha values must be >= 0".into());
            }
            if self.kt.iter().any(|&x| x <= 0.0) {
                return fail("controlled runs need kt > 0".into());
            }
            if !(self.update_step > 0.0) {
                return fail("update_step must be > 0".into());
            }
        }
        if self.r.iter().any(|&x| x <= 0.0) {
            return fail("r values must be > 0".into());
        }
        if self.kt.iter().any(|&x| x < 0.0) {
            return fail("kt values must be >= 0".into());
        }
        if !(self.omega0 > 0.0) || !(self.coupling2 > 0.0) {
            return fail("omega0 and coupling2 must be > 0".into());
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return fail(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(self.grid > 0.0) || !self.grid.is_finite() {
            return fail(format!("grid resolution must be > 0, got {}", self.grid));
        }
        if !(self.dwell >= 0.0) {
            return fail("dwell must be >= 0".into());
        }
        if !(self.atol > 0.0) || !(self.rtol > 0.0) {
            return fail("integrator tolerances must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
    /// Display names for categorical axes (the mode axis).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// One output quantity over the full grid, row-major in axis order, time
/// fastest. `None` marks cells of failed points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub data: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    /// Index into each parameter axis (time excluded).
    pub index: Vec<usize>,
    pub params: Vec<(String, f64)>,
    pub esd: Option<ESDReport>,
    /// Death time in units of `1/kT`.
    pub death_time_kt: Option<f64>,
    pub error: Option<PointError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub format_version: u32,
    pub crate_version: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: Scenario,
    /// Parameter axes followed by the time axis `t`.
    pub axes: Vec<Axis>,
    pub fields: Vec<Field>,
    pub points: Vec<PointReport>,
    pub metadata: Metadata,
}

impl SweepResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn times(&self) -> &[f64] {
        &self.axes.last().expect("time axis").values
    }

    /// Flat offset of a full index (parameters then time).
    pub fn offset(&self, index: &[usize]) -> usize {
        self.shape()
            .iter()
            .zip(index)
            .fold(0, |acc, (len, i)| acc * len + i)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PointReport> {
        self.points.iter().filter(|p| p.error.is_some())
    }

    pub fn all_succeeded(&self) -> bool {
        self.failures().next().is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    /// Rayon pool when the `parallel` feature is on, otherwise sequential.
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub execution: Execution,
    /// Worker count for the parallel pool; rayon's default when `None`.
    pub workers: Option<usize>,
}

/// Parameter axes of the scenario.
fn parameter_axes(spec: &SweepSpec) -> Vec<Axis> {
    let axis = |name: &str, values: &[f64]| Axis {
        name: name.into(),
        values: values.to_vec(),
        labels: None,
    };
    match spec.scenario {
        Scenario::Coefficients => vec![axis("kt", &spec.kt), axis("r", &spec.r)],
        Scenario::Controlled => vec![
            axis("r", &spec.r),
            axis("kt", &spec.kt),
            axis("a", &spec.a),
            axis("alpha", &spec.alpha),
        ],
        _ => {
            let modes = spec.modes();
            vec![
                Axis {
                    name: "mode".into(),
                    values: (0..modes.len()).map(|i| i as f64).collect(),
                    labels: Some(modes.iter().map(|m| m.as_str().to_string()).collect()),
                },
                axis("r", &spec.r),
                axis("kt", &spec.kt),
                axis("a", &spec.a),
            ]
        }
    }
}

pub fn field_names(scenario: Scenario) -> &'static [&'static str] {
    match scenario {
        Scenario::Coefficients => &["delta", "gamma", "delta_markov", "gamma_markov"],
        Scenario::Controlled => &["concurrence", "k", "eof", "temperature"],
        _ => &["concurrence", "k", "k1", "k2", "eof"],
    }
}

struct PointData {
    /// `fields[f][time]`
    fields: Vec<Vec<f64>>,
    esd: Option<ESDReport>,
}

fn run_point(spec: &SweepSpec, axes: &[Axis], index: &[usize]) -> Result<PointData> {
    let value = |name: &str| -> f64 {
        let k = axes.iter().position(|a| a.name == name).expect("axis present");
        axes[k].values[index[k]]
    };
    let bath = BathParams::new(spec.omega0, value("r"), value("kt"), spec.coupling2)?;
    let times = output_grid(spec.horizon, spec.grid)?;
    let defaults = EvolveOptions::default();
    let opts = EvolveOptions {
        coefficients: spec.coefficients,
        ode: OdeOptions {
            atol: spec.atol,
            rtol: spec.rtol,
            ..defaults.ode
        },
    };
    match spec.scenario {
        Scenario::Coefficients => {
            let model = coefficient_model(&bath, Mode::NonMarkovian, spec.horizon, spec.coefficients)?;
            let m = markov_limits(&bath);
            let mut delta = Vec::with_capacity(times.len());
            let mut gamma = Vec::with_capacity(times.len());
            for &t in &times {
                let s = model.sample(t)?;
                delta.push(s.delta);
                gamma.push(s.gamma);
            }
            let n = times.len();
            Ok(PointData {
                fields: vec![delta, gamma, vec![m.delta; n], vec![m.gamma; n]],
                esd: None,
            })
        }
        Scenario::Controlled => {
            let cfg = ControllerConfig {
                alpha: value("alpha"),
                kt0: bath.kt,
                update_step: spec.update_step,
                neglect_gamma: spec.neglect_gamma,
            };
            let initial = XState::yu_eberly(value("a"))?;
            let run = evolve_controlled_with(&initial, &bath, &cfg, spec.horizon, spec.grid, &opts)?;
            let series = ConcurrenceSeries::from_trajectory(&run.trajectory);
            let esd = analyze_esd(&series, &bath, spec.dwell);
            let eof = series.concurrence.iter().map(|&c| entanglement_of_formation(c)).collect();
            Ok(PointData {
                fields: vec![series.concurrence, series.k, eof, run.trajectory.temperature],
                esd: Some(esd),
            })
        }
        _ => {
            let mode = spec.modes()[index[0]];
            let initial = XState::yu_eberly(value("a"))?;
            let traj = evolve_with(&initial, &bath, mode, spec.horizon, spec.grid, &opts)?;
            let series = ConcurrenceSeries::from_trajectory(&traj);
            let esd = analyze_esd(&series, &bath, spec.dwell);
            let eof = series.concurrence.iter().map(|&c| entanglement_of_formation(c)).collect();
            Ok(PointData {
                fields: vec![series.concurrence, series.k, series.k1, series.k2, eof],
                esd: Some(esd),
            })
        }
    }
}

fn all_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &len in shape {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..len).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

fn execute<T, F>(items: &[Vec<usize>], opts: &RunOptions, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[usize]) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if opts.execution == Execution::Parallel {
        use rayon::prelude::*;
        let work = || items.par_iter().map(|i| f(i)).collect::<Vec<T>>();
        return match opts.workers {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(work),
                Err(_) => items.iter().map(|i| f(i)).collect(),
            },
            None => work(),
        };
    }
    #[cfg(not(feature = "parallel"))]
    let _ = opts;
    items.iter().map(|i| f(i)).collect()
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, &RunOptions::default())
}

/// Runs every grid point. Failed points become null cells with an error
/// record; only an invalid spec is an error.
pub fn run_sweep_with(spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult> {
    spec.validate()?;
    let times = output_grid(spec.horizon, spec.grid)?;
    let param_axes = parameter_axes(spec);
    let shape: Vec<usize> = param_axes.iter().map(|a| a.values.len()).collect();
    let indices = all_indices(&shape);
    let outcomes = execute(&indices, opts, |index| run_point(spec, &param_axes, index));

    let names = field_names(spec.scenario);
    let n_t = times.len();
    let mut fields: Vec<Field> = names
        .iter()
        .map(|name| Field {
            name: name.to_string(),
            data: Vec::with_capacity(indices.len() * n_t),
        })
        .collect();
    let mut points = Vec::with_capacity(indices.len());
    for (index, outcome) in indices.iter().zip(outcomes) {
        let params: Vec<(String, f64)> = param_axes
            .iter()
            .zip(index)
            .map(|(a, &i)| (a.name.clone(), a.values[i]))
            .collect();
        let kt = params.iter().find(|(n, _)| n == "kt").map_or(0.0, |p| p.1);
        match outcome {
            Ok(data) => {
                for (field, values) in fields.iter_mut().zip(data.fields) {
                    field.data.extend(values.into_iter().map(Some));
                }
                let death_time_kt = data
                    .esd
                    .as_ref()
                    .and_then(|e| e.death_time)
                    .filter(|_| kt > 0.0)
                    .map(|d| d * kt);
                points.push(PointReport {
                    index: index.clone(),
                    params,
                    esd: data.esd,
                    death_time_kt,
                    error: None,
                });
            }
            Err(e) => {
                for field in fields.iter_mut() {
                    field.data.extend(std::iter::repeat_n(None, n_t));
                }
                points.push(PointReport {
                    index: index.clone(),
                    params,
                    esd: None,
                    death_time_kt: None,
                    error: Some(PointError {
                        code: e.code().into(),
                        message: e.to_string(),
                    }),
                });
            }
        }
    }

    let mut axes = param_axes;
    axes.push(Axis {
        name: "t".into(),
        values: times,
        labels: None,
    });
    Ok(SweepResult {
        scenario: spec.scenario,
        axes,
        fields,
        points,
        metadata: Metadata {
            format_version: FORMAT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").into(),
            spec: spec.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
        }
        assert!("fig9".parse::<Scenario>().is_err());
    }

    #[test]
    fn empty_range_is_rejected() {
        let mut spec = SweepSpec::new(Scenario::ConcurrenceVsA);
        spec.a.clear();
        assert!(matches!(run_sweep(&spec), Err(Error::SpecError(_))));
        let mut spec = SweepSpec::new(Scenario::Coefficients);
        spec.grid = 0.0;
        assert!(matches!(run_sweep(&spec), Err(Error::SpecError(_))));
    }

    #[test]
    fn index_enumeration_is_row_major() {
        assert_eq!(
            all_indices(&[2, 3]),
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
    }

    #[test]
    fn shape_matches_field_length() {
        let mut spec = SweepSpec::new(Scenario::Coefficients);
        spec.kt = vec![0.01, 1.0, 100.0];
        spec.horizon = 2.0;
        spec.grid = 0.5;
        let res = run_sweep(&spec).unwrap();
        let total: usize = res.shape().iter().product();
        assert_eq!(res.shape(), vec![3, 1, 5]);
        for f in &res.fields {
            assert_eq!(f.data.len(), total);
        }
        assert!(res.all_succeeded());
    }
}
