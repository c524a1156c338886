//! Globally adaptive Gauss-Kronrod (10/21 point) integration.

// Nodes and weights are kept at their published precision.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_478,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

/// Weights of the embedded 10-point Gauss rule (nodes `XGK[1], XGK[3], ...`).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// One 21-point Kronrod panel; returns (Kronrod value, |Kronrod - Gauss|).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (value, error, _) = gk21_with_magnitude(f, a, b);
    (value, error)
}

/// As [`gk21`], plus the Kronrod estimate of `∫|f|` for round-off control.
fn gk21_with_magnitude<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut magnitude = WGK[10] * fc.abs();
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        let pair = lo + hi;
        kronrod += WGK[j] * pair;
        magnitude += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (
        kronrod * half,
        ((kronrod - gauss) * half).abs(),
        magnitude * half.abs(),
    )
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

/// Adaptive integration of `f` over `[a, b]`, bisecting the worst segment
/// until the summed error estimate meets `max(abs_tol, rel_tol |I|)`, or
/// falls to the round-off level of `∫|f|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let (value, error, magnitude) = gk21_with_magnitude(&f, a, b);
    let mut segments = vec![Segment {
        a,
        b,
        value,
        error,
        magnitude,
    }];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let roundoff = 50.0 * f64::EPSILON * segments.iter().map(|s| s.magnitude).sum::<f64>();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()).max(roundoff) {
            return Ok(QuadResult {
                value: total,
                error: err,
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "error estimate {err:e} above tolerance after {} subdivisions on [{a}, {b}]",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::QuadratureFailure(format!(
                "interval [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let (value, error, magnitude) = gk21_with_magnitude(&f, lo, hi);
            segments.push(Segment {
                a: lo,
                b: hi,
                value,
                error,
                magnitude,
            });
        }
    }
}

/// Splits `[a, b]` into panels no wider than `max_width` and integrates each
/// adaptively. Meant for long oscillatory ranges, where a single global
/// bisection tree would spend most of its effort resolving sign changes.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    max_width: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    // Each panel gets a share of the absolute budget.
    let panel_opts = QuadOptions {
        abs_tol: opts.abs_tol / panels as f64,
        ..opts
    };
    let mut value = 0.0;
    let mut error = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let r = integrate(&f, lo, hi, panel_opts)?;
        value += r.value;
        error += r.error;
    }
    Ok(QuadResult { value, error })
}
