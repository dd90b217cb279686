//! Dormand-Prince 5(4) integrator for complex linear systems, with PI step
//! control and the standard fourth-order continuous extension.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Step-size and tolerance settings shared by every propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Absolute floor on the step size. The effective floor is
    /// `max(min_step, 1e-9·|t₁ - t₀|)`.
    pub min_step: f64,
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 1.0,
            min_step: 1e-14,
            initial_step: 1e-4,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorConfig { rtol, atol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "integrator config needs positive tolerances and 0 < min_step ≤ initial_step ≤ max_step: {self:?}"
            )))
        }
    }
}

/// Stiffness budget: steps below this fraction of the interval fail the run.
pub const MIN_STEP_FRACTION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest normalized error estimate over accepted steps (≤ 1).
    pub max_local_error: f64,
}

#[derive(Clone, Debug)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[C64; N]; 5],
}

/// Piecewise continuous extension over the accepted steps.
#[derive(Clone, Debug)]
pub struct DenseOutput<const N: usize> {
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseOutput<N> {
    pub fn t_start(&self) -> f64 {
        self.segments.first().map_or(f64::NAN, |s| s.t0)
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(f64::NAN, |s| s.t0 + s.h)
    }

    /// Step boundaries, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        out.push(self.t_end());
        out
    }

    /// Interpolated state at `t`, clamped to the covered interval.
    pub fn eval(&self, t: f64) -> [C64; N] {
        let idx = self.segments.partition_point(|s| s.t0 + s.h < t).min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        let theta = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        let c = &seg.coeffs;
        std::array::from_fn(|i| {
            c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + c[4][i] * th1) * theta) * th1) * theta
        })
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution<const N: usize> {
    pub y: [C64; N],
    pub stats: StepStats,
    pub dense: Option<DenseOutput<N>>,
}

/// Which part of the trajectory to keep as dense output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DenseMode {
    None,
    All,
    /// Keep segments ending at or after this time.
    After(f64),
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

// PI controller (Hairer & Wanner, DOPRI5 defaults)
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[inline]
fn combine<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    std::array::from_fn(|i| {
        let mut acc = C64::new(0.0, 0.0);
        for &(w, k) in terms {
            acc += k[i] * w;
        }
        y[i] + acc * h
    })
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 ≥ t0`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [C64; N],
    t1: f64,
    cfg: &IntegratorConfig,
    dense: DenseMode,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
{
    cfg.validate()?;
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!("integration needs t1 ≥ t0, got [{t0}, {t1}]")));
    }
    let mut stats = StepStats::default();
    let mut segments = Vec::new();
    if t1 == t0 {
        return Ok(OdeSolution {
            y: y0,
            stats,
            dense: (dense != DenseMode::None).then(|| DenseOutput {
                segments: vec![Segment { t0, h: 0.0, coeffs: [y0, [C64::new(0.0, 0.0); N], [C64::new(0.0, 0.0); N], [C64::new(0.0, 0.0); N], [C64::new(0.0, 0.0); N]] }],
            }),
        });
    }

    let span = t1 - t0;
    let min_step = cfg.min_step.max(MIN_STEP_FRACTION * span);
    let mut h = cfg.initial_step.max(min_step).min(cfg.max_step).min(span);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut err_old = 1e-4_f64;
    let mut last_rejected = false;

    loop {
        let last = t + h >= t1 - 1e-15 * span.max(1.0);
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &combine(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(
            t + h,
            &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = cfg.atol + cfg.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / scale);
        }

        if !err.is_finite() {
            return Err(Error::StepSizeUnderflow { s: t, step: h, min_step });
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            stats.accepted += 1;
            stats.max_local_error = stats.max_local_error.max(err);
            let keep = match dense {
                DenseMode::None => false,
                DenseMode::All => true,
                DenseMode::After(ta) => t + h >= ta,
            };
            if keep {
                let mut coeffs = [[C64::new(0.0, 0.0); N]; 5];
                for i in 0..N {
                    let dy = y_new[i] - y[i];
                    let bspl = k1[i] * h - dy;
                    coeffs[0][i] = y[i];
                    coeffs[1][i] = dy;
                    coeffs[2][i] = bspl;
                    coeffs[3][i] = dy - k7[i] * h - bspl;
                    coeffs[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                segments.push(Segment { t0: t, h, coeffs });
            }
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k7;
            if last {
                break;
            }
            let mut fac = fac11 / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            last_rejected = false;
            h = h_new.min(cfg.max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
        if h < min_step {
            return Err(Error::StepSizeUnderflow { s: t, step: h, min_step });
        }
    }

    Ok(OdeSolution {
        y,
        stats,
        dense: (dense != DenseMode::None).then_some(DenseOutput { segments }),
    })
}
