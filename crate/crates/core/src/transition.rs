//! Transition probabilities: the measured value from full propagation, the
//! coherent Landau-Zener term, the dephasing correction, the exact Duhamel
//! split of the measured value, and order fits of the residual.

use std::f64::consts::PI;
use std::time::Instant;

use crate::algebra::{Operator2, SuperOp};
use crate::error::{Error, Result};
use crate::lindblad::apply_dephasing_part;
use crate::model::{GammaProfile, LzFamily};
use crate::propagate::{
    cptp_report, evolve_dual_dense, evolve_state_dense, evolve_superop_with_dense, IntegratorConfig,
};
use crate::quad::{gk15, integrate_sinh, QuadResult};

pub const DEFAULT_QTOL: f64 = 1e-12;

/// Allowed excursion of a measured probability outside `[0, 1]` before it
/// counts as an error rather than roundoff.
pub const CLAMP_TOL: f64 = 1e-8;

/// `exp(-πg²/2ε)`.
pub fn coherent_lz(g: f64, epsilon: f64) -> f64 {
    (-PI * g * g / (2.0 * epsilon)).exp()
}

/// Horizon `25/g` used when none is given.
pub fn default_horizon(g_min: f64) -> f64 {
    25.0 / g_min
}

/// `∫_{-T}^{T} g²γ_τ/(64(1+γ_τ²)e_τ⁵) dτ`; `horizon` may be infinite.
pub fn incoherent_integral_with_error(fam: &LzFamily, gamma: &GammaProfile, horizon: f64, qtol: f64) -> Result<QuadResult> {
    if !(qtol > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("need qtol > 0 and T > 0, got {qtol}, {horizon}")));
    }
    if gamma.is_zero() {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let g = fam.g();
    let w = gamma.sup().min(0.5);
    integrate_sinh(
        |t| {
            let gs = gamma.value(t);
            g * g * gs / (64.0 * (1.0 + gs * gs) * fam.gap_energy(t).powi(5))
        },
        g,
        -horizon,
        horizon,
        qtol,
        |x| g * g * w / (8.0 * x.powi(4)),
    )
}

pub fn incoherent_integral(fam: &LzFamily, gamma: &GammaProfile, horizon: f64, qtol: f64) -> Result<f64> {
    incoherent_integral_with_error(fam, gamma, horizon, qtol).map(|r| r.value)
}

/// Bound on the two tails `|τ| > T` of the incoherent integral, from
/// `γ/(1+γ²) ≤ min(γ̄, ½)` and `e_τ ≥ |τ|/2`.
pub fn tail_bound(g: f64, gamma_sup: f64, horizon: f64) -> f64 {
    g * g * gamma_sup.min(0.5) / (4.0 * horizon.powi(4))
}

/// `exp(-πg²/2ε) + ε ∫_ℝ g²γ/(64(1+γ²)e⁵)`.
pub fn predicted_p(fam: &LzFamily, gamma: &GammaProfile, epsilon: f64, qtol: f64) -> Result<f64> {
    Ok(coherent_lz(fam.g(), epsilon) + epsilon * incoherent_integral(fam, gamma, f64::INFINITY, qtol)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionRecord {
    pub g: f64,
    pub epsilon: f64,
    pub gamma_desc: String,
    pub horizon: f64,
    pub p_measured: f64,
    /// Instantaneous excited population averaged over the last phase period
    /// `πε/e_T` before the horizon.
    pub p_period_avg: f64,
    pub p_coherent: f64,
    pub incoherent_integral: f64,
    pub p_predicted: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub cptp_trace_defect: f64,
    pub choi_min_eig: f64,
    /// `|⟨E_T, ρ_T⟩| + |⟨E_T*, ρ_T⟩|` for the propagated ground state.
    pub final_coherence: f64,
    pub steps_accepted: usize,
    pub noise_floor: f64,
    pub clamped: bool,
    pub wall_time: f64,
}

/// Propagates `P⁻_{-T}` to `T` and records `tr(P⁺_T 𝓤_ε(T, -T) P⁻_{-T})`
/// with the prediction and diagnostics.
pub fn measured_p(fam: &LzFamily, gamma: &GammaProfile, epsilon: f64, horizon: f64, cfg: &IntegratorConfig) -> Result<TransitionRecord> {
    measured_p_with_qtol(fam, gamma, epsilon, horizon, cfg, DEFAULT_QTOL)
}

pub fn measured_p_with_qtol(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    horizon: f64,
    cfg: &IntegratorConfig,
    qtol: f64,
) -> Result<TransitionRecord> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let start = Instant::now();
    let g = fam.g();
    let period = PI * epsilon / fam.gap_energy(horizon);
    let avg_from = (horizon - period).max(-horizon);
    let (u, dense) = evolve_superop_with_dense(fam, gamma, epsilon, -horizon, horizon, cfg, Some(avg_from))?;
    let dense = dense.expect("dense output requested");

    let rho0 = fam.projectors(-horizon).1;
    let rho_t = u.value.apply(&rho0);
    let (pp_t, _) = fam.projectors(horizon);
    let raw = pp_t.pairing(&rho_t).re;
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&raw) {
        return Err(Error::PositivityViolation(raw));
    }
    let clamped = !(0.0..=1.0).contains(&raw);
    if clamped {
        log::warn!("measured p = {raw:.3e} outside [0, 1] (g = {g}, ε = {epsilon}, γ = {gamma}); clamped");
    }
    let p_measured = raw.clamp(0.0, 1.0);

    let mut population = |s: f64| {
        let us = SuperOp::from_flat(&dense.eval(s));
        fam.projectors(s).0.pairing(&us.apply(&rho0)).re
    };
    let (avg, _) = gk15(&mut population, avg_from, horizon);
    let p_period_avg = avg / (horizon - avg_from);

    let coeffs = fam.basis_coefficients(horizon, &rho_t);
    let final_coherence = coeffs[2].norm() + coeffs[3].norm();

    let q = incoherent_integral_with_error(fam, gamma, f64::INFINITY, qtol)?;
    let p_coherent = coherent_lz(g, epsilon);
    let p_predicted = p_coherent + epsilon * q.value;
    let report = cptp_report(&u.value);
    let noise_floor = 10.0 * (cfg.rtol * u.steps_accepted as f64 + qtol);

    Ok(TransitionRecord {
        g,
        epsilon,
        gamma_desc: gamma.to_string(),
        horizon,
        p_measured,
        p_period_avg,
        p_coherent,
        incoherent_integral: q.value,
        p_predicted,
        residual: p_measured - p_predicted,
        tail_bound: tail_bound(g, gamma.sup(), horizon),
        cptp_trace_defect: report.trace_defect,
        choi_min_eig: report.choi_min_eig,
        final_coherence,
        steps_accepted: u.steps_accepted,
        noise_floor,
        clamped,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuhamelSplit {
    /// `tr(P⁺_T 𝓤_{ε,0}(T, -T) P⁻_{-T})`, the evolution without dephasing.
    pub coherent_part: f64,
    /// `(1/2ε) ∫ γ_τ tr((𝓤_ε*(T, τ)P⁺_T) 𝓓_τ(𝓤_{ε,0}(τ, -T)P⁻_{-T})) dτ`.
    pub incoherent_part: f64,
    pub quadrature_error: f64,
}

impl DuhamelSplit {
    pub fn total(&self) -> f64 {
        self.coherent_part + self.incoherent_part
    }
}

/// The Duhamel decomposition of the measured probability around the
/// dephasing-free evolution. One dual propagation of `P⁺_T` and one forward
/// propagation without dephasing supply the integrand; it is integrated
/// with a 15-point Kronrod panel on every interval of the merged step grid.
pub fn duhamel_split(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    horizon: f64,
    cfg: &IntegratorConfig,
    qtol: f64,
) -> Result<DuhamelSplit> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let zero = GammaProfile::Constant { amplitude: 0.0 };
    let rho0 = fam.projectors(-horizon).1;
    let (pp_t, _) = fam.projectors(horizon);
    let (free, free_traj) = evolve_state_dense(fam, &zero, epsilon, &rho0, -horizon, horizon, cfg)?;
    let coherent_part = pp_t.pairing(&free.value).re;
    if gamma.is_zero() {
        return Ok(DuhamelSplit { coherent_part, incoherent_part: 0.0, quadrature_error: 0.0 });
    }
    let (_, dual_traj) = evolve_dual_dense(fam, gamma, epsilon, &pp_t, horizon, -horizon, cfg)?;

    let mut grid = free_traj.breakpoints();
    grid.extend(dual_traj.breakpoints());
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * horizon);

    let mut integrand = |tau: f64| duhamel_integrand(fam, gamma, tau, &dual_traj.eval(tau), &free_traj.eval(tau));
    let mut value = 0.0;
    let mut error = 0.0;
    for w in grid.windows(2) {
        let (v, e) = gk15(&mut integrand, w[0], w[1]);
        value += v;
        error += e;
    }
    if error > qtol.max(1e2 * f64::EPSILON * value.abs()) * 1e3 {
        return Err(Error::QuadratureNonConvergence { lo: -horizon, hi: horizon, error, tol: qtol });
    }
    let scale = 0.5 / epsilon;
    Ok(DuhamelSplit { coherent_part, incoherent_part: scale * value, quadrature_error: scale * error })
}

/// `γ_τ tr(A 𝓓_τ ρ)`.
pub fn duhamel_integrand(fam: &LzFamily, gamma: &GammaProfile, tau: f64, observable: &Operator2, state: &Operator2) -> f64 {
    gamma.value(tau) * observable.pairing(&apply_dephasing_part(fam, tau, state)).re
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderFit {
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `max |R|/ε²` over the fitted points.
    pub max_scaled_residual: f64,
}

/// Least squares of `ln|R|` against `ln ε`.
pub fn fit_log_log(epsilons: &[f64], residuals: &[f64]) -> Result<OrderFit> {
    if epsilons.len() != residuals.len() {
        return Err(Error::InvalidArgument("epsilon and residual lists differ in length".into()));
    }
    if epsilons.len() < 3 {
        return Err(Error::InsufficientFitPoints(epsilons.len()));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) || !ys.iter().all(|y| y.is_finite()) {
        return Err(Error::InvalidArgument("fit needs distinct epsilons and nonzero residuals".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    let max_scaled_residual = epsilons
        .iter()
        .zip(residuals)
        .map(|(e, r)| r.abs() / (e * e))
        .fold(0.0, f64::max);
    Ok(OrderFit {
        epsilons: epsilons.to_vec(),
        residuals: residuals.to_vec(),
        slope,
        intercept,
        r_squared,
        max_scaled_residual,
    })
}

/// Fits the residual order over records sharing `(g, γ, T)`. Records whose
/// residual lies within their noise floor are left out.
pub fn order_fit(records: &[TransitionRecord]) -> Result<OrderFit> {
    let first = records.first().ok_or(Error::InsufficientFitPoints(0))?;
    for r in records {
        if r.g != first.g || r.gamma_desc != first.gamma_desc || r.horizon != first.horizon {
            return Err(Error::InvalidArgument(format!(
                "order fit needs a shared (g, γ, T); got ({}, {}, {}) and ({}, {}, {})",
                first.g, first.gamma_desc, first.horizon, r.g, r.gamma_desc, r.horizon
            )));
        }
    }
    let mut eps: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("order fit needs distinct epsilons".into()));
    }
    let kept: Vec<&TransitionRecord> = records.iter().filter(|r| r.residual.abs() > r.noise_floor).collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientFitPoints(kept.len()));
    }
    let e: Vec<f64> = kept.iter().map(|r| r.epsilon).collect();
    let res: Vec<f64> = kept.iter().map(|r| r.residual).collect();
    fit_log_log(&e, &res)
}
