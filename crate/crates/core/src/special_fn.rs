//! Gauss hypergeometric series on `0 <= z < 1` and the exponential integrals
//! needed by the zero-temperature noise kernel.
//!
//! The coefficient formulas only ever need `2F1` at `z = exp(-nu1 * t)` with
//! `t > 0`, so everything here is plain power-series summation. There are no
//! analytic continuations and no branch cuts to worry about.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Parameters of a Gauss series `2F1(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub z: f64,
}

impl HypParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Self {
        Self { a, b, c, z }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.z) {
            return Err(Error::InvalidParams(format!(
                "z must lie in [0, 1), got {}",
                self.z
            )));
        }
        if is_non_positive_integer(self.c) {
            return Err(Error::InvalidParams(format!(
                "c = {} is a non-positive integer",
                self.c
            )));
        }
        Ok(())
    }
}

/// Truncation control shared by all series in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Relative truncation tolerance.
    pub tol: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: 1_000_000,
        }
    }
}

fn is_non_positive_integer(c: Complex64) -> bool {
    c.im == 0.0 && c.re <= 0.0 && c.re.fract() == 0.0
}

/// Generic Gauss series, terms generated by
/// `t_{n+1} = t_n (a+n)(b+n) / ((c+n)(1+n)) z`.
pub fn hyp2f1(p: &HypParams, opts: SeriesOptions) -> Result<Complex64> {
    p.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    if p.z == 0.0 {
        return Ok(one);
    }
    let mut term = one;
    let mut sum = one;
    for n in 0..opts.max_terms {
        let nf = n as f64;
        let ratio = (p.a + nf) * (p.b + nf) / ((p.c + nf) * (1.0 + nf)) * p.z;
        term *= ratio;
        sum += term;
        if term == Complex64::new(0.0, 0.0) {
            return Ok(sum);
        }
        let q = ratio.norm();
        // Ratios decrease towards z once past the parameter hump, so the
        // geometric tail estimate with the current ratio bounds the rest.
        if q < 1.0 && term.norm() * q / (1.0 - q) <= opts.tol * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        terms: opts.max_terms,
        z: p.z,
    })
}

/// Which reduced series to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduced {
    /// `sum_n x/(x+n) z^n = 2F1(x, 1; 1+x; z)`
    F,
    /// `sum_n (n+1)(1+x)/(1+x+n) z^n = 2F1(2, 1+x; 2+x; z)`
    G,
}

fn reduced_series(
    kind: Reduced,
    x: Complex64,
    z: f64,
    skip: Option<usize>,
    opts: SeriesOptions,
) -> Result<Complex64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidParams(format!(
            "z must lie in [0, 1), got {z}"
        )));
    }
    let shift = match kind {
        Reduced::F => x,
        Reduced::G => x + 1.0,
    };
    // Pole check: x + n (resp. 1 + x + n) vanishing for a kept index.
    if shift.im == 0.0 && shift.re <= 0.0 && shift.re.fract() == 0.0 {
        let pole = (-shift.re) as usize;
        if skip != Some(pole) && !(kind == Reduced::F && x.re == 0.0) {
            return Err(Error::InvalidParams(format!(
                "reduced series has a pole at n = {pole} (x = {x})"
            )));
        }
    }
    let coefficient = |n: usize| -> Complex64 {
        let nf = n as f64;
        match kind {
            Reduced::F => {
                if n == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    x / (x + nf)
                }
            }
            Reduced::G => (nf + 1.0) * (1.0 + x) / (1.0 + x + nf),
        }
    };

    let mut sum = Complex64::new(0.0, 0.0);
    if z == 0.0 {
        return Ok(if skip == Some(0) { sum } else { coefficient(0) });
    }
    let n_min = 2 * shift.norm().ceil() as usize + 2;
    let mut power = 1.0;
    for n in 0..opts.max_terms {
        if skip != Some(n) {
            let term = coefficient(n) * power;
            sum += term;
            if n >= n_min && term.norm() / (1.0 - z) <= opts.tol * sum.norm() {
                return Ok(sum);
            }
        }
        power *= z;
        if power == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        terms: opts.max_terms,
        z,
    })
}

fn hyp_argument(t: f64, nu1: f64) -> Result<f64> {
    if !(t > 0.0) || !(nu1 > 0.0) || !t.is_finite() || !nu1.is_finite() {
        return Err(Error::SingularLimit(format!(
            "hypergeometric argument exp(-nu1 t) needs t > 0 and nu1 > 0 (t = {t}, nu1 = {nu1})"
        )));
    }
    Ok((-nu1 * t).exp())
}

/// `F(x, t) = 2F1(x, 1; 1+x; exp(-nu1 t))` via the reduced single-fraction series.
pub fn fbar(x: Complex64, t: f64, nu1: f64) -> Result<Complex64> {
    fbar_at(x, hyp_argument(t, nu1)?, None, SeriesOptions::default())
}

/// `G(x, t) = 2F1(2, 1+x; 2+x; exp(-nu1 t))` via the reduced single-fraction series.
pub fn gbar(x: Complex64, t: f64, nu1: f64) -> Result<Complex64> {
    gbar_at(x, hyp_argument(t, nu1)?, None, SeriesOptions::default())
}

/// Reduced `F` series at an explicit argument `z`, optionally leaving out the
/// term with index `skip` (used to cancel the pole at integer `-x` by hand).
pub fn fbar_at(
    x: Complex64,
    z: f64,
    skip: Option<usize>,
    opts: SeriesOptions,
) -> Result<Complex64> {
    reduced_series(Reduced::F, x, z, skip, opts)
}

pub fn gbar_at(
    x: Complex64,
    z: f64,
    skip: Option<usize>,
    opts: SeriesOptions,
) -> Result<Complex64> {
    reduced_series(Reduced::G, x, z, skip, opts)
}

/// `exp(x) * E1(x)` for `x > 0`.
pub fn scaled_e1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 1.0 {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut fact_term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            fact_term *= -x / kf;
            let contribution = fact_term / kf;
            sum += contribution;
            if contribution.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        x.exp() * (-EULER_GAMMA - x.ln() - sum)
    } else {
        // Modified Lentz evaluation of the continued fraction for exp(x) E1(x).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// `exp(-x) * Ei(x)` for `x > 0`.
pub fn scaled_ei(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 40.0 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..400 {
            let kf = k as f64;
            fact *= x / kf;
            let term = fact / kf;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (-x).exp() * (EULER_GAMMA + x.ln() + sum)
    } else {
        // Asymptotic series (1/x) sum k!/x^k, truncated at its smallest term.
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            term *= k as f64 / x;
            if term >= prev {
                break;
            }
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            prev = term;
        }
        sum / x
    }
}
