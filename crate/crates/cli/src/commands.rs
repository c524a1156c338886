use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use esd_core::controller::{evolve_controlled_with, ControllerConfig};
use esd_core::dynamics::{coefficient_model, evolve_with, output_grid, EvolveOptions, Mode, Trajectory, XState};
use esd_core::entanglement::{analyze_esd, entanglement_of_formation, ConcurrenceSeries, ESDReport};
use esd_core::kernels::{markov_limits, BathParams};
use esd_core::ode::OdeOptions;
use esd_core::sweep::{field_names, run_sweep_with, Execution, RunOptions, Scenario, SweepResult, SweepSpec};
use esd_core::validate::{run_validation, ValidationConfig};

use crate::config::Settings;
use crate::output::{write_csv, write_json, write_plot, Cell};
use crate::CliError;

/// Optional worker count for sweeps.
pub const WORKERS_ENV: &str = "ESDSIM_WORKERS";

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Report lines for the console (validation verdicts).
    pub messages: Vec<String>,
    /// Human-readable failures of individual points.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn bath(settings: &Settings, r: f64, kt: f64) -> Result<BathParams, esd_core::Error> {
    BathParams::new(
        settings.f64("omega0").unwrap_or(1.0),
        r,
        kt,
        settings.f64("coupling2").unwrap_or(1.0),
    )
}

fn evolve_options(settings: &Settings) -> Result<EvolveOptions, CliError> {
    Ok(EvolveOptions {
        ode: OdeOptions {
            atol: settings.f64("atol")?,
            rtol: settings.f64("rtol")?,
            ..OdeOptions::default()
        },
        coefficients: settings.coefficient_mode()?,
    })
}

fn tag(v: f64) -> String {
    format!("{v}")
}

pub fn cmd_coefficients(settings: &Settings, out: &Path) -> Result<Outcome, CliError> {
    let rs = settings.list("r")?;
    let kts = settings.list("kt")?;
    if rs.is_empty() || kts.is_empty() {
        return Err(CliError::Usage("r and kt need at least one value".into()));
    }
    let horizon = settings.f64("horizon")?;
    let grid = settings.f64("grid")?;
    let times = output_grid(horizon, grid)?;
    let coefficients = settings.coefficient_mode()?;
    // validate every point before writing anything
    let baths = rs
        .iter()
        .flat_map(|&r| kts.iter().map(move |&kt| (r, kt)))
        .map(|(r, kt)| bath(settings, r, kt))
        .collect::<Result<Vec<_>, _>>()?;
    let nested = baths.len() > 1;
    let mut outcome = Outcome::default();
    for b in &baths {
        let dir = if nested {
            out.join(format!("r{}_kt{}", tag(b.r), tag(b.kt)))
        } else {
            out.to_path_buf()
        };
        let m = markov_limits(b);
        let samples = coefficient_model(b, Mode::NonMarkovian, horizon, coefficients)
            .and_then(|model| times.iter().map(|&t| model.sample(t)).collect::<Result<Vec<_>, _>>());
        let samples = match samples {
            Ok(s) => s,
            Err(e) => {
                outcome
                    .failures
                    .push(format!("r = {}, kT = {}: {} ({})", b.r, b.kt, e, e.code()));
                continue;
            }
        };
        let rows = samples.iter().map(|s| {
            vec![
                Cell::Num(s.t),
                Cell::Num(s.delta),
                Cell::Num(s.gamma),
                Cell::Num(m.delta),
                Cell::Num(m.gamma),
                Cell::Text(s.method.as_str().into()),
            ]
        });
        let extra = [("point.r", tag(b.r)), ("point.kt", tag(b.kt))];
        outcome.files.push(write_csv(
            &dir.join("coefficients.csv"),
            settings,
            &extra,
            &["t", "delta", "gamma", "delta_markov", "gamma_markov", "method"],
            rows,
        )?);
        outcome.files.push(write_plot(
            &dir.join("coefficients.plot"),
            &format!("coefficients, r = {}, kT = {}", b.r, b.kt),
            "set xlabel 't'\nplot 'coefficients.csv' using 1:2 with lines title 'delta', \\\n     '' using 1:3 with lines title 'gamma', \\\n     '' using 1:4 with lines dt 2 title 'delta_M', \\\n     '' using 1:5 with lines dt 2 title 'gamma_M'\n",
        )?);
    }
    Ok(outcome)
}

const TRAJECTORY_HEADER: [&str; 14] = [
    "t",
    "p11",
    "p22",
    "p33",
    "p44",
    "re_c23",
    "im_c23",
    "re_c14",
    "im_c14",
    "k1",
    "k2",
    "concurrence",
    "eof",
    "kT",
];

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<Cell>> {
    let series = ConcurrenceSeries::from_trajectory(traj);
    (0..traj.times.len())
        .map(|i| {
            let s: &XState = &traj.states[i];
            let c = series.concurrence[i];
            vec![
                traj.times[i],
                s.p11,
                s.p22,
                s.p33,
                s.p44,
                s.c23.re,
                s.c23.im,
                s.c14.re,
                s.c14.im,
                series.k1[i],
                series.k2[i],
                c,
                entanglement_of_formation(c),
                traj.temperature[i],
            ]
            .into_iter()
            .map(Cell::Num)
            .collect()
        })
        .collect()
}

fn esd_value(report: &ESDReport, kt: f64, traj: &Trajectory) -> Value {
    json!({
        "esd": report,
        "death_time_kt": report.death_time.filter(|_| kt > 0.0).map(|d| d * kt),
        "max_trace_drift": traj.max_trace_drift,
    })
}

pub fn cmd_evolve(settings: &Settings, out: &Path) -> Result<Outcome, CliError> {
    let b = bath(settings, settings.scalar("r")?, settings.scalar("kt")?)?;
    let initial = XState::yu_eberly(settings.scalar("a")?)?;
    let horizon = settings.f64("horizon")?;
    let grid = settings.f64("grid")?;
    let dwell = settings.f64("dwell")?;
    let modes = settings.modes()?;
    let opts = evolve_options(settings)?;
    output_grid(horizon, grid)?;
    let mut outcome = Outcome::default();
    for &mode in &modes {
        let dir = if modes.len() > 1 {
            out.join(mode.as_str())
        } else {
            out.to_path_buf()
        };
        let traj = match evolve_with(&initial, &b, mode, horizon, grid, &opts) {
            Ok(t) => t,
            Err(e) => {
                outcome.failures.push(format!("{}: {} ({})", mode.as_str(), e, e.code()));
                continue;
            }
        };
        let report = analyze_esd(&ConcurrenceSeries::from_trajectory(&traj), &b, dwell);
        let extra = [("mode", mode.as_str().to_string())];
        outcome.files.push(write_csv(
            &dir.join("trajectory.csv"),
            settings,
            &extra,
            &TRAJECTORY_HEADER,
            trajectory_rows(&traj),
        )?);
        let mut payload = Map::new();
        payload.insert("mode".into(), json!(mode.as_str()));
        if let Value::Object(m) = esd_value(&report, b.kt, &traj) {
            payload.extend(m);
        }
        outcome.files.push(write_json(&dir.join("esd.json"), settings, payload)?);
        outcome.files.push(write_plot(
            &dir.join("evolve.plot"),
            &format!("{} evolution", mode.as_str()),
            "set xlabel 't'\nset yrange [0:1]\nplot 'trajectory.csv' using 1:12 with lines title 'concurrence', \\\n     '' using 1:13 with lines title 'eof'\n",
        )?);
    }
    Ok(outcome)
}

pub fn sweep_spec(settings: &Settings) -> Result<SweepSpec, CliError> {
    let scenario: Scenario = settings.raw("scenario").unwrap_or("").parse()?;
    Ok(SweepSpec {
        scenario,
        omega0: settings.f64("omega0")?,
        coupling2: settings.f64("coupling2")?,
        r: settings.list("r")?,
        kt: settings.list("kt")?,
        a: settings.list("a")?,
        alpha: settings.list("alpha")?,
        modes: settings.modes()?,
        horizon: settings.f64("horizon")?,
        grid: settings.f64("grid")?,
        dwell: settings.f64("dwell")?,
        update_step: settings.f64("update_step")?,
        neglect_gamma: settings.bool("neglect_gamma")?,
        coefficients: settings.coefficient_mode()?,
        atol: settings.f64("atol")?,
        rtol: settings.f64("rtol")?,
    })
}

fn sweep_rows(result: &SweepResult) -> Vec<Vec<Cell>> {
    let times = result.times();
    let mut rows = Vec::with_capacity(result.points.len() * times.len());
    for (p, point) in result.points.iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            let mut row: Vec<Cell> = point
                .index
                .iter()
                .zip(&result.axes)
                .map(|(&i, axis)| match &axis.labels {
                    Some(labels) => Cell::Text(labels[i].clone()),
                    None => Cell::Num(axis.values[i]),
                })
                .collect();
            row.push(Cell::Num(t));
            let offset = p * times.len() + ti;
            row.extend(result.fields.iter().map(|f| Cell::from(f.data[offset])));
            rows.push(row);
        }
    }
    rows
}

fn sweep_plot(result: &SweepResult, csv: &str) -> String {
    let n_axes = result.axes.len() - 1;
    let t_col = n_axes + 1;
    let first_field = t_col + 1;
    match result.scenario {
        Scenario::Coefficients => format!(
            "set xlabel 't'\nset logscale y\nplot '{csv}' using {t_col}:{first_field} with lines title 'delta', \\\n     '' using {t_col}:{} with lines title 'gamma'\n",
            first_field + 1
        ),
        Scenario::KTrace => format!(
            "set xlabel 't'\nset ylabel 'K'\nplot '{csv}' using {t_col}:{} with lines title 'K'\n",
            first_field + 1
        ),
        _ => {
            let y_col = match result.scenario {
                Scenario::ConcurrenceVsTemp => 3,
                Scenario::Controlled => 3,
                _ => 4,
            };
            let y_name = &result.axes[y_col - 1].name;
            format!(
                "set xlabel 't'\nset ylabel '{y_name}'\nset zlabel 'concurrence'\nset pm3d\nsplot '{csv}' using {t_col}:{y_col}:{first_field} with points palette pointsize 0.3 title 'concurrence'\n"
            )
        }
    }
}

pub fn cmd_sweep(settings: &Settings, out: &Path) -> Result<Outcome, CliError> {
    let spec = sweep_spec(settings)?;
    spec.validate()?;
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))
        })?),
        Err(_) => None,
    };
    let result = run_sweep_with(
        &spec,
        &RunOptions {
            execution: Execution::default(),
            workers,
        },
    )?;
    let name = spec.scenario.as_str();
    let mut header: Vec<&str> = result.axes.iter().map(|a| a.name.as_str()).collect();
    header.extend(field_names(spec.scenario));
    let csv_name = format!("{name}.csv");
    let extra = [("scenario", name.to_string())];
    let mut outcome = Outcome::default();
    outcome
        .files
        .push(write_csv(&out.join(&csv_name), settings, &extra, &header, sweep_rows(&result))?);
    let mut payload = Map::new();
    payload.insert("surface".into(), serde_json::to_value(&result)?);
    outcome.files.push(write_json(&out.join("surface.json"), settings, payload)?);
    outcome.files.push(write_plot(
        &out.join(format!("{name}.plot")),
        name,
        &sweep_plot(&result, &csv_name),
    )?);
    for p in result.failures() {
        let e = p.error.as_ref().expect("failed point");
        outcome.failures.push(format!("{:?}: {} ({})", p.params, e.message, e.code));
    }
    Ok(outcome)
}

pub fn cmd_control(settings: &Settings, out: &Path) -> Result<Outcome, CliError> {
    let b = bath(settings, settings.scalar("r")?, settings.scalar("kt")?)?;
    let initial = XState::yu_eberly(settings.scalar("a")?)?;
    let horizon = settings.f64("horizon")?;
    let grid = settings.f64("grid")?;
    let dwell = settings.f64("dwell")?;
    let opts = evolve_options(settings)?;
    let cfg = ControllerConfig {
        alpha: settings.scalar("alpha")?,
        kt0: b.kt,
        update_step: settings.f64("update_step")?,
        neglect_gamma: settings.bool("neglect_gamma")?,
    };
    cfg.validate()?;
    output_grid(horizon, grid)?;
    let baseline_cfg = ControllerConfig { alpha: 0.0, ..cfg };

    let mut outcome = Outcome::default();
    let mut payload = Map::new();
    for (label, c) in [("controlled", cfg), ("baseline", baseline_cfg)] {
        let run = match evolve_controlled_with(&initial, &b, &c, horizon, grid, &opts) {
            Ok(r) => r,
            Err(e) => {
                outcome.failures.push(format!("{label}: {} ({})", e, e.code()));
                payload.insert(label.into(), json!({ "error": { "code": e.code(), "message": e.to_string() } }));
                continue;
            }
        };
        let report = analyze_esd(&ConcurrenceSeries::from_trajectory(&run.trajectory), &b, dwell);
        let extra = [("run", label.to_string()), ("alpha", format!("{}", c.alpha))];
        outcome.files.push(write_csv(
            &out.join(format!("{label}.csv")),
            settings,
            &extra,
            &TRAJECTORY_HEADER,
            trajectory_rows(&run.trajectory),
        )?);
        let mut entry = esd_value(&report, b.kt, &run.trajectory);
        if let Value::Object(m) = &mut entry {
            m.insert("alpha".into(), json!(c.alpha));
            m.insert("schedule".into(), serde_json::to_value(&run.schedule)?);
        }
        payload.insert(label.into(), entry);
    }
    outcome.files.push(write_json(&out.join("control.json"), settings, payload)?);
    outcome.files.push(write_plot(
        &out.join("control.plot"),
        "controlled vs uncontrolled",
        "set xlabel 't'\nset ylabel 'concurrence'\nset y2label 'kT'\nset y2tics\nplot 'controlled.csv' using 1:12 with lines title 'controlled', \\\n     'baseline.csv' using 1:12 with lines title 'alpha = 0', \\\n     'controlled.csv' using 1:14 axes x1y2 with steps title 'kT'\n",
    )?);
    Ok(outcome)
}

pub fn cmd_validate(settings: &Settings, out: &Path) -> Result<Outcome, CliError> {
    let cfg = ValidationConfig {
        seed: settings.u64("seed")?,
        kernel_points: settings.usize("kernel_points")?,
        x_states: settings.usize("x_states")?,
    };
    let report = run_validation(&cfg);
    let mut outcome = Outcome::default();
    for c in &report.checks {
        outcome.messages.push(format!(
            "{} {} (metric {:e}, tolerance {:e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.metric,
            c.tolerance,
            c.detail
        ));
        if !c.passed {
            outcome.failures.push(format!("{}: {}", c.name, c.detail));
        }
    }
    let mut payload = Map::new();
    payload.insert("report".into(), serde_json::to_value(&report)?);
    outcome.files.push(write_json(&out.join("validation.json"), settings, payload)?);
    Ok(outcome)
}
