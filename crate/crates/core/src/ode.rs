//! Dormand-Prince 5(4) integrator with FSAL and the standard fourth-order
//! dense output, for small fixed-size real systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-8,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Interpolant over one accepted step.
struct Dense<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Result of [`solve`]: states at the requested output times, the final
/// state and the last accepted step size (to warm-start a follow-up call).
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub outputs: Vec<[f64; N]>,
    pub y_end: [f64; N],
    pub h_last: f64,
    pub steps: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, sampling the dense output
/// at `out_times` (sorted, inside `[t0, t_end]`). `check` is called on every
/// accepted step and on every output; an `Err` aborts the integration.
pub fn solve<const N: usize, F, C>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    out_times: &[f64],
    opts: &OdeOptions,
    mut check: C,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    C: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if !(t_end >= t0) {
        return Err(Error::InvalidArgument(format!(
            "integration interval [{t0}, {t_end}] is reversed"
        )));
    }
    let mut outputs = Vec::with_capacity(out_times.len());
    let mut next_out = 0;
    while next_out < out_times.len() && out_times[next_out] <= t0 {
        outputs.push(y0);
        next_out += 1;
    }
    if t_end == t0 {
        return Ok(Solution {
            outputs,
            y_end: y0,
            h_last: opts.h_init.unwrap_or(0.0),
            steps: 0,
            rejected: 0,
        });
    }

    let span = t_end - t0;
    let scale = |y: &[f64; N], z: &[f64; N], i: usize| opts.atol + opts.rtol * y[i].abs().max(z[i].abs());
    let mut k1 = f(t0, &y0)?;
    let mut h = match opts.h_init {
        Some(h) if h > 0.0 => h,
        _ => {
            let mut d0: f64 = 0.0;
            let mut d1: f64 = 0.0;
            for i in 0..N {
                let sc = opts.atol + opts.rtol * y0[i].abs();
                d0 += (y0[i] / sc).powi(2);
                d1 += (k1[i] / sc).powi(2);
            }
            let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            let y1 = combine(&y0, h0, &[(1.0, &k1)]);
            let k2 = f(t0 + h0, &y1)?;
            let mut d2: f64 = 0.0;
            for i in 0..N {
                d2 += ((k2[i] - k1[i]) / (opts.atol + opts.rtol * y0[i].abs())).powi(2);
            }
            let d2 = (d2 / N as f64).sqrt() / h0;
            let h1 = if d1.max(d2) <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            };
            (100.0 * h0).min(h1)
        }
    }
    .min(opts.h_max)
    .min(span);

    let mut t = t0;
    let mut y = y0;
    let mut steps = 0;
    let mut rejected = 0;
    let mut h_last = h;
    while t < t_end {
        if steps + rejected >= opts.max_steps {
            return Err(Error::StepFailure { t, h });
        }
        let last = t + h >= t_end || t_end - (t + h) < 1e-12 * span;
        let h_step = if last { t_end - t } else { h };
        if h_step <= 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::StepFailure { t, h: h_step });
        }

        let y2 = combine(&y, h_step, &[(A21, &k1)]);
        let k2 = f(t + C2 * h_step, &y2)?;
        let y3 = combine(&y, h_step, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * h_step, &y3)?;
        let y4 = combine(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * h_step, &y4)?;
        let y5 = combine(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * h_step, &y5)?;
        let y6 = combine(
            &y,
            h_step,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let t_new = if last { t_end } else { t + h_step };
        let k6 = f(t_new, &y6)?;
        let y_new = combine(
            &y,
            h_step,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t_new, &y_new)?;

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = h_step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err += (e / scale(&y, &y_new, i)).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::StepFailure { t, h: h_step });
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err > 1.0 {
            rejected += 1;
            h = h_step * factor.min(1.0);
            continue;
        }

        steps += 1;
        check(t_new, &y_new)?;
        if next_out < out_times.len() && out_times[next_out] <= t_new {
            let mut r = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y_new[i] - y[i];
                let bspl = h_step * k1[i] - dy;
                r[0][i] = y[i];
                r[1][i] = dy;
                r[2][i] = bspl;
                r[3][i] = dy - h_step * k7[i] - bspl;
                r[4][i] = h_step
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let dense = Dense { t0: t, h: h_step, r };
            while next_out < out_times.len() && out_times[next_out] <= t_new {
                let tau = out_times[next_out];
                let value = if tau == t_new { y_new } else { dense.eval(tau) };
                check(tau, &value)?;
                outputs.push(value);
                next_out += 1;
            }
        }
        t = t_new;
        y = y_new;
        k1 = k7;
        if !last {
            h_last = h_step;
        }
        h = (h_step * factor).min(opts.h_max);
    }
    Ok(Solution {
        outputs,
        y_end: y,
        h_last,
        steps,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let sol = solve(
            |_, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            10.0,
            &times,
            &OdeOptions::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert_eq!(sol.outputs.len(), times.len());
        for (t, y) in times.iter().zip(&sol.outputs) {
            assert!((y[0] - (-t).exp()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.137).collect();
        let opts = OdeOptions {
            atol: 1e-12,
            rtol: 1e-12,
            ..OdeOptions::default()
        };
        let sol = solve(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            13.7,
            &times,
            &opts,
            |_, _| Ok(()),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&sol.outputs) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
            assert!((y[1] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t, y = sin t
        let sol = solve(
            |t, _: &[f64; 1]| Ok([t.cos()]),
            0.0,
            [0.0],
            7.0,
            &[7.0],
            &OdeOptions::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((sol.outputs[0][0] - 7f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn check_aborts() {
        let r = solve(
            |_, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            10.0,
            &[],
            &OdeOptions::default(),
            |t, _| {
                if t > 1.0 {
                    Err(Error::InvalidState("stop".into()))
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(r, Err(Error::InvalidState(_))));
    }

    #[test]
    fn blow_up_reports_step_failure() {
        let r = solve(
            |_, y: &[f64; 1]| Ok([y[0] * y[0]]),
            0.0,
            [1.0],
            2.0,
            &[],
            &OdeOptions::default(),
            |_, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::StepFailure { .. })));
    }
}
