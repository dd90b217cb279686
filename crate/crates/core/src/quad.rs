//! Adaptive Gauss-Kronrod (7, 15) quadrature with a global error queue, plus a
//! `τ = c·sinh(u)` front end for integrands with algebraic tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const MAX_INTERVALS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod panel on `[a, b]`, returning `(value, error estimate)`.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]` to
/// absolute tolerance `tol`. Panels are bisected worst-first. The target is
/// relaxed to the roundoff level `1e2·ε_mach·∫|f|` when that is larger.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("quadrature needs finite limits and tol > 0, got [{a}, {b}], tol {tol}")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let floor = 1e2 * f64::EPSILON * total.abs();
        if total_err <= tol.max(floor) {
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence { lo: a, hi: b, error: total_err, tol });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        if !(v1 + v2).is_finite() {
            return Err(Error::QuadratureNonConvergence { lo: a, hi: b, error: f64::INFINITY, tol });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running totals.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, evaluations })
}

/// Integrates `f` over `[lo, hi]` (either end may be infinite) through
/// `τ = scale·sinh(u)`. For an infinite end, `tail(x)` must bound
/// `∫_{|τ|>x} |f|` on that side; the range is cut where `tail ≤ 1e-3·tol`
/// and the bound is added to the error.
pub fn integrate_sinh<F, T>(mut f: F, scale: f64, lo: f64, hi: f64, tol: f64, tail: T) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!("sinh scale must be > 0, got {scale}")));
    }
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidArgument(format!("need lo ≤ hi, got [{lo}, {hi}]")));
    }
    let mut tail_err = 0.0;
    let mut cut = |limit: f64| -> f64 {
        if limit.is_finite() {
            return limit;
        }
        let mut x = 4.0 * scale;
        let target = 1e-3 * tol;
        while tail(x) > target {
            x *= 2.0;
            if x > 1e12 * scale {
                break;
            }
        }
        tail_err += tail(x);
        x.copysign(limit)
    };
    let lo = cut(lo);
    let hi = cut(hi);
    let ua = (lo / scale).asinh();
    let ub = (hi / scale).asinh();
    let mut r = integrate(
        |u| {
            let tau = scale * u.sinh();
            f(tau) * scale * u.cosh()
        },
        ua,
        ub,
        tol,
    )?;
    r.error += tail_err;
    Ok(r)
}
