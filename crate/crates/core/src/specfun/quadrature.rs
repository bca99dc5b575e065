//! Adaptive quadrature on finite and semi-infinite ranges.
//!
//! Finite ranges use a globally adaptive 21-point Gauss–Kronrod rule with the
//! QUADPACK error heuristics. The half line `(0, ∞)` is mapped onto the real
//! line by `ξ = c·eˢ`, where the knee `c` is a scale hint. Under this map an
//! integrable singularity `ξ^(z-1)` at the origin and an algebraic tail
//! `ξ^(-p)` both turn into exponential decay in `s`, and `e^(-ξ)` tails turn
//! into double-exponential decay. The transformed integrand is located
//! (peak and width), its support is walked outwards until the remaining mass
//! is negligible, and the resulting finite range is refined adaptively.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances and budget shared by every numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of interval bisections performed by the adaptive
    /// refinement.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(domain(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(domain(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if self.max_subdivisions == 0 {
            return Err(domain("max_subdivisions must be >= 1"));
        }
        Ok(())
    }

    /// Same budget with both tolerances replaced.
    pub fn with_tolerance(self, tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..self
        }
    }

}

/// Value of an integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

/// Logarithm of a positive integral, for integrands evaluated in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEstimate {
    pub ln_value: f64,
    pub rel_error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut f1 = [0.0; 10];
    let mut f2 = [0.0; 10];
    #[allow(clippy::needless_range_loop)]
    for j in 0..5 {
        let k = 2 * j + 1;
        let dx = half * XGK[k];
        let (a, b) = (f(center - dx), f(center + dx));
        res_g += WG[j] * (a + b);
        res_k += WGK[k] * (a + b);
        res_abs += WGK[k] * (a.abs() + b.abs());
        f1[k] = a;
        f2[k] = b;
    }
    for j in 0..5 {
        let k = 2 * j;
        let dx = half * XGK[k];
        let (a, b) = (f(center - dx), f(center + dx));
        res_k += WGK[k] * (a + b);
        res_abs += WGK[k] * (a.abs() + b.abs());
        f1[k] = a;
        f2[k] = b;
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for k in 0..10 {
        res_asc += WGK[k] * ((f1[k] - mean).abs() + (f2[k] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Globally adaptive refinement over the partition given by `breaks`.
/// `scale` divides the absolute tolerance (used when the integrand has been
/// normalised) and `extra_error` is error already committed elsewhere.
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    q: &QuadratureSpec,
    abs_tol: f64,
    extra_error: f64,
) -> Result<Estimate> {
    let mut segments: Vec<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss_kronrod_21(f, w[0], w[1]))
        .collect();
    let mut evaluations = 21 * segments.len();
    let mut subdivisions = 0;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum::<f64>() + extra_error;
        if !value.is_finite() {
            return Err(domain("integrand produced a non-finite value"));
        }
        let target = abs_tol.max(q.rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate {
                value,
                abs_error: error,
                evaluations,
                subdivisions,
            });
        }
        if subdivisions >= q.max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions,
                achieved: error,
                target,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if !(mid > seg.lo && mid < seg.hi) {
            // Interval cannot be split further in floating point.
            return Err(Error::NonConvergence {
                subdivisions,
                achieved: error,
                target,
            });
        }
        segments.push(gauss_kronrod_21(f, seg.lo, mid));
        segments.push(gauss_kronrod_21(f, mid, seg.hi));
        evaluations += 42;
        subdivisions += 1;
    }
}

/// Integrates `f` over the finite interval `[lo, hi]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    q.validate()?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(domain("integration bounds must be finite"));
    }
    if lo == hi {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            subdivisions: 0,
        });
    }
    let (a, b, sign) = if lo < hi { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
    let est = refine(&f, &[a, b], q, q.abs_tol, 0.0)?;
    Ok(Estimate {
        value: sign * est.value,
        ..est
    })
}

/// Integrates `f` over `(0, ∞)` with a unit knee.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, q: &QuadratureSpec) -> Result<Estimate> {
    integrate_semi_infinite_scaled(f, 1.0, q)
}

/// Integrates `f` over `(0, ∞)`; `knee` is the scale where most of the mass
/// is expected and only seeds the search.
pub fn integrate_semi_infinite_scaled<F: Fn(f64) -> f64>(
    f: F,
    knee: f64,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    q.validate()?;
    if !(knee.is_finite() && knee > 0.0) {
        return Err(domain(format!("knee must be > 0, got {knee}")));
    }
    let mapped = |s: f64| {
        let xi = knee * s.exp();
        f(xi) * xi
    };
    let log_mapped = |s: f64| mapped(s).abs().ln();
    let bounds = mapped_bounds(knee);
    let Some(peak) = locate_peak(&log_mapped, bounds)? else {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            subdivisions: 0,
        });
    };
    let scale = peak.ln_height.exp();
    let normalized = |s: f64| mapped(s) / scale;
    let support = walk_support(&log_mapped, &peak, bounds, q.rel_tol, q.abs_tol / scale)?;
    let est = refine(
        &normalized,
        &support.breaks,
        q,
        0.5 * q.abs_tol / scale,
        support.tail_mass,
    )?;
    Ok(Estimate {
        value: est.value * scale,
        abs_error: est.abs_error * scale,
        evaluations: est.evaluations + peak.evaluations + support.evaluations,
        subdivisions: est.subdivisions,
    })
}

/// Computes `ln ∫₀^∞ exp(ln_f(ξ)) dξ` for a non-negative integrand given in
/// log space. Only the relative tolerance of `q` applies.
pub fn integrate_exp_semi_infinite<F: Fn(f64) -> f64>(
    ln_f: F,
    knee: f64,
    q: &QuadratureSpec,
) -> Result<LogEstimate> {
    q.validate()?;
    if !(knee.is_finite() && knee > 0.0) {
        return Err(domain(format!("knee must be > 0, got {knee}")));
    }
    let ln_knee = knee.ln();
    let log_mapped = |s: f64| ln_f(knee * s.exp()) + s + ln_knee;
    let bounds = mapped_bounds(knee);
    let Some(peak) = locate_peak(&log_mapped, bounds)? else {
        return Ok(LogEstimate {
            ln_value: f64::NEG_INFINITY,
            rel_error: 0.0,
            evaluations: 0,
        });
    };
    let normalized = |s: f64| (log_mapped(s) - peak.ln_height).exp();
    let support = walk_support(&log_mapped, &peak, bounds, q.rel_tol, 0.0)?;
    let est = refine(&normalized, &support.breaks, q, 0.0, support.tail_mass)?;
    if est.value <= 0.0 {
        return Err(domain("log-space integrand has no mass"));
    }
    Ok(LogEstimate {
        ln_value: peak.ln_height + est.value.ln(),
        rel_error: est.abs_error / est.value,
        evaluations: est.evaluations + peak.evaluations + support.evaluations,
    })
}

/// Range of `s` for which `knee·eˢ` stays a comfortable normal number.
fn mapped_bounds(knee: f64) -> (f64, f64) {
    let ln_knee = knee.ln();
    (-690.0 - ln_knee, 690.0 - ln_knee)
}

#[derive(Debug, Clone, Copy)]
struct Peak {
    location: f64,
    ln_height: f64,
    width: f64,
    evaluations: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Finds the maximum of a log-integrand on the mapped line. Returns `None`
/// when the integrand vanishes everywhere it was probed.
fn locate_peak<L: Fn(f64) -> f64>(ln_g: &L, (s_min, s_max): (f64, f64)) -> Result<Option<Peak>> {
    let mut evaluations = 0;
    let mut eval = |s: f64| {
        evaluations += 1;
        let v = ln_g(s);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let mut start = 0.0_f64.clamp(s_min, s_max);
    let mut l_start = eval(start);
    if !l_start.is_finite() {
        if l_start == f64::INFINITY {
            return Err(domain("integrand is infinite at the knee"));
        }
        let mut found = false;
        for k in 1..=60 {
            for s in [k as f64, -(k as f64)] {
                if s < s_min || s > s_max {
                    continue;
                }
                let l = eval(s);
                if l.is_finite() {
                    start = s;
                    l_start = l;
                    found = true;
                    break;
                }
            }
            if found {
                break;
            }
        }
        if !found {
            return Ok(None);
        }
    }

    // Bracket the maximum by stepping uphill with doubling steps.
    let h = 0.25;
    let l_right = eval((start + h).min(s_max));
    let l_left = eval((start - h).max(s_min));
    let (mut lo, mut hi) = if l_right <= l_start && l_left <= l_start {
        ((start - h).max(s_min), (start + h).min(s_max))
    } else {
        let dir = if l_right > l_left { 1.0 } else { -1.0 };
        let mut prev = start;
        let mut cur = (start + dir * h).clamp(s_min, s_max);
        let mut l_cur = if dir > 0.0 { l_right } else { l_left };
        let mut step = h;
        loop {
            step *= 2.0;
            let next = (cur + dir * step).clamp(s_min, s_max);
            if next == cur {
                // Still rising at the edge of the representable range.
                break (prev.min(cur), prev.max(cur));
            }
            let l_next = eval(next);
            if l_next <= l_cur {
                break (prev.min(next), prev.max(next));
            }
            if l_next == f64::INFINITY {
                return Err(domain("integrand is infinite"));
            }
            prev = cur;
            cur = next;
            l_cur = l_next;
        }
    };

    // Golden-section refinement.
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while hi - lo > 1e-5 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = eval(x1);
        }
    }
    let (location, ln_height) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    let (location, ln_height) = if l_start > ln_height {
        (start, l_start)
    } else {
        (location, ln_height)
    };
    if !ln_height.is_finite() {
        return Err(domain("integrand is not finite near its maximum"));
    }

    let d = 1e-3;
    let curvature = (eval(location + d) + eval(location - d) - 2.0 * ln_height) / (d * d);
    let width = if curvature < 0.0 && curvature.is_finite() {
        (1.0 / (-curvature).sqrt()).clamp(1e-6, 2.0)
    } else {
        1.0
    };
    Ok(Some(Peak {
        location,
        ln_height,
        width,
        evaluations,
    }))
}

struct Support {
    breaks: Vec<f64>,
    /// Estimated normalised mass outside the breaks.
    tail_mass: f64,
    evaluations: usize,
}

/// Walks away from the peak in both directions until the remaining tail is
/// negligible relative to the mass seen so far.
fn walk_support<L: Fn(f64) -> f64>(
    ln_g: &L,
    peak: &Peak,
    (s_min, s_max): (f64, f64),
    rel_tol: f64,
    abs_tol_normalized: f64,
) -> Result<Support> {
    const MAX_STEP: f64 = 2.0;
    const GROWTH: f64 = 1.25;
    let mut evaluations = 0;
    let mut points_right = Vec::new();
    let mut points_left = Vec::new();
    // The peak has normalised height 1 and roughly width·√(2π) of mass.
    let core_mass = peak.width * 2.5;
    let mut tails = [0.0; 2];

    for (side, dir) in [(0usize, 1.0f64), (1, -1.0)] {
        let bound = if dir > 0.0 { s_max } else { s_min };
        let mut s = peak.location;
        let mut l_prev = peak.ln_height;
        let mut step = 0.5 * peak.width;
        let mut mass = core_mass;
        let mut travelled = 0.0;
        loop {
            let next = s + dir * step;
            let at_bound = (dir > 0.0 && next >= bound) || (dir < 0.0 && next <= bound);
            let next = if at_bound { bound } else { next };
            let l = ln_g(next) - peak.ln_height;
            evaluations += 1;
            let v = if l.is_nan() { 0.0 } else { l.exp() };
            let taken = (next - s).abs();
            mass += v * taken;
            travelled += taken;
            let decay = (l_prev - peak.ln_height - l) / taken.max(f64::MIN_POSITIVE);
            let tail = if v == 0.0 {
                0.0
            } else if decay > 0.0 {
                v / decay
            } else {
                f64::INFINITY
            };
            let target = (rel_tol * mass).max(abs_tol_normalized);
            if dir > 0.0 {
                points_right.push(next);
            } else {
                points_left.push(next);
            }
            s = next;
            l_prev = l + peak.ln_height;
            if travelled >= 3.0 * peak.width && tail <= 0.01 * target {
                tails[side] = tail;
                break;
            }
            if at_bound {
                if tail <= 0.1 * target || v <= f64::EPSILON * 1e-3 {
                    tails[side] = tail.min(v);
                    break;
                }
                return Err(Error::Divergence(format!(
                    "integrand does not decay towards {}",
                    if dir > 0.0 { "infinity" } else { "the origin" }
                )));
            }
            step = (step * GROWTH).min(MAX_STEP);
        }
    }

    // Group walk points into at most a few dozen initial intervals.
    let mut all: Vec<f64> = points_left.into_iter().rev().collect();
    all.push(peak.location);
    all.extend(points_right);
    let stride = all.len().div_ceil(24).max(1);
    let mut breaks: Vec<f64> = all.iter().copied().step_by(stride).collect();
    let last = *all.last().expect("non-empty walk");
    if *breaks.last().expect("non-empty breaks") != last {
        breaks.push(last);
    }
    Ok(Support {
        breaks,
        tail_mass: tails[0] + tails[1],
        evaluations,
    })
}
