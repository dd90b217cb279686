//! Numerical solution of `ε ρ̇ = 𝓛_s ρ` for states, for the full
//! superpropagator `𝓤_ε(s₁, s₀)`, and for observables under the dual
//! evolution.

use num_complex::Complex64 as C64;

use crate::algebra::{Operator2, SuperOp};
use crate::error::{Error, Result};
use crate::lindblad::{apply_dual_lindbladian, apply_lindbladian};
use crate::model::{GammaProfile, LzFamily};
use crate::ode::{integrate, DenseMode, DenseOutput};

pub use crate::ode::{IntegratorConfig, StepStats};

/// Lowest eigenvalue tolerated in a propagated density matrix.
pub const POSITIVITY_TOL: f64 = -1e-8;

/// Tolerance for accepting an initial state as a density matrix.
pub const DENSITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationResult<T> {
    pub value: T,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub max_local_error: f64,
}

impl<T> PropagationResult<T> {
    fn new(value: T, stats: StepStats) -> Self {
        PropagationResult {
            value,
            steps_accepted: stats.accepted,
            steps_rejected: stats.rejected,
            max_local_error: stats.max_local_error,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")))
    }
}

fn check_span(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("propagation needs finite {lo} ≤ {hi}")))
    }
}

/// A state trajectory with continuous output in the physical variable `s`.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    dense: DenseOutput<4>,
}

impl StateTrajectory {
    pub fn eval(&self, s: f64) -> Operator2 {
        Operator2::devectorize(&self.dense.eval(s))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.dense.breakpoints()
    }
}

/// An observable trajectory under the dual evolution, integrated in `t = -s`
/// and queried in the physical variable.
#[derive(Clone, Debug)]
pub struct DualTrajectory {
    dense: DenseOutput<4>,
}

impl DualTrajectory {
    pub fn eval(&self, s: f64) -> Operator2 {
        Operator2::devectorize(&self.dense.eval(-s))
    }

    /// Step boundaries in the physical variable, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.dense.breakpoints().into_iter().map(|t| -t).collect();
        b.reverse();
        b
    }
}

fn state_rhs<'a>(fam: &'a LzFamily, gamma: &'a GammaProfile, epsilon: f64) -> impl FnMut(f64, &[C64; 4]) -> [C64; 4] + 'a {
    let inv = 1.0 / epsilon;
    move |s, y| {
        let rho = Operator2::devectorize(y);
        (apply_lindbladian(fam, s, gamma.value(s), &rho) * inv).vectorize()
    }
}

#[allow(clippy::too_many_arguments)]
fn operator_run(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    rho0: &Operator2,
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
    dense: DenseMode,
) -> Result<(PropagationResult<Operator2>, Option<DenseOutput<4>>)> {
    check_epsilon(epsilon)?;
    check_span(s0, s1)?;
    let sol = integrate(state_rhs(fam, gamma, epsilon), s0, rho0.vectorize(), s1, cfg, dense)?;
    Ok((PropagationResult::new(Operator2::devectorize(&sol.y), sol.stats), sol.dense))
}

fn check_density_in(rho0: &Operator2) -> Result<()> {
    if rho0.is_density(DENSITY_TOL) {
        Ok(())
    } else {
        Err(Error::NotDensity(format!(
            "trace {:.3e}, hermiticity defect {:.3e}, min eigenvalue {:.3e}",
            rho0.trace(),
            rho0.hermiticity_defect(),
            rho0.hermitian_eigenvalues()[0]
        )))
    }
}

fn check_positivity_out(rho: &Operator2) -> Result<()> {
    let min = rho.hermitian_eigenvalues()[0];
    if min >= POSITIVITY_TOL {
        Ok(())
    } else {
        Err(Error::PositivityViolation(min))
    }
}

/// Evolves a density matrix from `s0` to `s1 ≥ s0`.
pub fn evolve_state(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    rho0: &Operator2,
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult<Operator2>> {
    check_density_in(rho0)?;
    let (r, _) = operator_run(fam, gamma, epsilon, rho0, s0, s1, cfg, DenseMode::None)?;
    check_positivity_out(&r.value)?;
    Ok(r)
}

/// Evolves an arbitrary operator with no density checks.
pub fn evolve_operator(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    x0: &Operator2,
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult<Operator2>> {
    operator_run(fam, gamma, epsilon, x0, s0, s1, cfg, DenseMode::None).map(|(r, _)| r)
}

/// [`evolve_state`] with continuous output over the whole interval.
pub fn evolve_state_dense(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    rho0: &Operator2,
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
) -> Result<(PropagationResult<Operator2>, StateTrajectory)> {
    check_density_in(rho0)?;
    let (r, dense) = operator_run(fam, gamma, epsilon, rho0, s0, s1, cfg, DenseMode::All)?;
    check_positivity_out(&r.value)?;
    Ok((r, StateTrajectory { dense: dense.expect("dense output requested") }))
}

/// `𝓤_ε(s1, s0)` as one 16-component system, with continuous output kept
/// from `dense_from` onward if given.
pub fn evolve_superop_with_dense(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
    dense_from: Option<f64>,
) -> Result<(PropagationResult<SuperOp>, Option<DenseOutput<16>>)> {
    check_epsilon(epsilon)?;
    check_span(s0, s1)?;
    let inv = 1.0 / epsilon;
    let rhs = |s: f64, y: &[C64; 16]| {
        let gs = gamma.value(s);
        let mut out = [C64::new(0.0, 0.0); 16];
        for c in 0..4 {
            let col: [C64; 4] = std::array::from_fn(|r| y[4 * c + r]);
            let img = (apply_lindbladian(fam, s, gs, &Operator2::devectorize(&col)) * inv).vectorize();
            out[4 * c..4 * c + 4].copy_from_slice(&img);
        }
        out
    };
    let mode = dense_from.map_or(DenseMode::None, DenseMode::After);
    let sol = integrate(rhs, s0, SuperOp::identity().to_flat(), s1, cfg, mode)?;
    Ok((PropagationResult::new(SuperOp::from_flat(&sol.y), sol.stats), sol.dense))
}

pub fn evolve_superop(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult<SuperOp>> {
    evolve_superop_with_dense(fam, gamma, epsilon, s0, s1, cfg, None).map(|(r, _)| r)
}

#[allow(clippy::too_many_arguments)]
fn dual_run(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    a0: &Operator2,
    s_top: f64,
    s_bottom: f64,
    cfg: &IntegratorConfig,
    dense: DenseMode,
) -> Result<(PropagationResult<Operator2>, Option<DenseOutput<4>>)> {
    check_epsilon(epsilon)?;
    check_span(s_bottom, s_top)?;
    let inv = 1.0 / epsilon;
    // ε ∂_t V = 𝓛*_{-t} V for t from -s_top to -s_bottom
    let rhs = |t: f64, y: &[C64; 4]| {
        let s = -t;
        (apply_dual_lindbladian(fam, s, gamma.value(s), &Operator2::devectorize(y)) * inv).vectorize()
    };
    let sol = integrate(rhs, -s_top, a0.vectorize(), -s_bottom, cfg, dense)?;
    Ok((PropagationResult::new(Operator2::devectorize(&sol.y), sol.stats), sol.dense))
}

/// `𝓤_ε*(s_top, s_bottom) A₀`, the observable whose expectation in a state at
/// `s_bottom` equals that of `A₀` after forward evolution to `s_top`.
pub fn evolve_dual(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    a0: &Operator2,
    s_top: f64,
    s_bottom: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagationResult<Operator2>> {
    dual_run(fam, gamma, epsilon, a0, s_top, s_bottom, cfg, DenseMode::None).map(|(r, _)| r)
}

/// [`evolve_dual`] with `s ↦ 𝓤_ε*(s_top, s)A₀` available on `[s_bottom, s_top]`.
pub fn evolve_dual_dense(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    a0: &Operator2,
    s_top: f64,
    s_bottom: f64,
    cfg: &IntegratorConfig,
) -> Result<(PropagationResult<Operator2>, DualTrajectory)> {
    let (r, dense) = dual_run(fam, gamma, epsilon, a0, s_top, s_bottom, cfg, DenseMode::All)?;
    Ok((r, DualTrajectory { dense: dense.expect("dense output requested") }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    /// `max |U*(1) - 1|` entrywise.
    pub trace_defect: f64,
    pub choi_min_eig: f64,
}

pub fn cptp_report(u: &SuperOp) -> CptpReport {
    let id = Operator2::identity();
    CptpReport {
        trace_defect: (u.dual().apply(&id) - id).max_abs(),
        choi_min_eig: u.choi_eigenvalues()[0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fam(g: f64) -> LzFamily {
        LzFamily::new(g).unwrap()
    }

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn zero_interval_is_identity() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.5).unwrap();
        let rho = f.projectors(-2.0).1;
        let r = evolve_state(&f, &gm, 0.3, &rho, -2.0, -2.0, &cfg()).unwrap();
        assert_eq!(r.value, rho);
        let u = evolve_superop(&f, &gm, 0.3, 1.0, 1.0, &cfg()).unwrap();
        assert_eq!(u.value, SuperOp::identity());
    }

    #[test]
    fn unitary_evolution_keeps_purity() {
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        let rho = f.projectors(-8.0).1;
        let r = evolve_state(&f, &zero, 0.4, &rho, -8.0, 8.0, &cfg()).unwrap();
        let purity = (r.value * r.value).trace().re;
        assert!((purity - 1.0).abs() < 1e-9, "{purity}");
        assert!((r.value.trace().re - 1.0).abs() < 1e-12);
        assert!(r.value.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn maximally_mixed_is_stationary() {
        let f = fam(1.0);
        let gm = GammaProfile::gaussian_bump(1.0, 3.0).unwrap();
        let half = Operator2::identity() * 0.5;
        let r = evolve_state(&f, &gm, 0.2, &half, -10.0, 10.0, &cfg()).unwrap();
        assert!((r.value - half).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_non_density_input() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.5).unwrap();
        let bad = Operator2::identity();
        assert!(matches!(evolve_state(&f, &gm, 0.3, &bad, 0.0, 1.0, &cfg()), Err(Error::NotDensity(_))));
        assert!(evolve_operator(&f, &gm, 0.3, &bad, 0.0, 1.0, &cfg()).is_ok());
        assert!(evolve_state(&f, &gm, 0.0, &f.projectors(0.0).1, 0.0, 1.0, &cfg()).is_err());
        assert!(evolve_state(&f, &gm, 0.3, &f.projectors(0.0).1, 1.0, 0.0, &cfg()).is_err());
    }

    #[test]
    fn superop_matches_state_evolution() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.5).unwrap();
        let c = cfg();
        let u = evolve_superop(&f, &gm, 0.3, -6.0, 6.0, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let rho = random::density(&mut rng);
            let direct = evolve_state(&f, &gm, 0.3, &rho, -6.0, 6.0, &c).unwrap().value;
            assert!((u.value.apply(&rho) - direct).max_abs() <= 10.0 * c.rtol);
        }
        let rep = cptp_report(&u.value);
        assert!(rep.trace_defect < 1e-9);
        assert!(rep.choi_min_eig > -1e-8);
    }

    #[test]
    fn superop_composes() {
        let f = fam(1.0);
        let gm = GammaProfile::logistic(0.5, 2.0).unwrap();
        let c = cfg();
        let whole = evolve_superop(&f, &gm, 0.25, -5.0, 5.0, &c).unwrap().value;
        let a = evolve_superop(&f, &gm, 0.25, -5.0, 0.3, &c).unwrap().value;
        let b = evolve_superop(&f, &gm, 0.25, 0.3, 5.0, &c).unwrap().value;
        assert!((b * a - whole).max_abs() <= 10.0 * c.rtol);
    }

    #[test]
    fn dual_pairing_identity() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.8).unwrap();
        let c = cfg();
        let (top, bottom) = (4.0, -3.0);
        let u = evolve_superop(&f, &gm, 0.3, bottom, top, &c).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a = random::hermitian(&mut rng);
            let rho = random::density(&mut rng);
            let da = evolve_dual(&f, &gm, 0.3, &a, top, bottom, &c).unwrap().value;
            let lhs = da.pairing(&rho);
            let rhs = a.pairing(&u.apply(&rho));
            assert!((lhs - rhs).norm() < 1e-8, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn dual_keeps_identity() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(1.0).unwrap();
        let id = Operator2::identity();
        let r = evolve_dual(&f, &gm, 0.2, &id, 5.0, -5.0, &cfg()).unwrap();
        assert!((r.value - id).max_abs() < 1e-12);
    }

    #[test]
    fn dual_unitary_preserves_spectrum() {
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        let h = f.hamiltonian(3.0);
        let r = evolve_dual(&f, &zero, 0.3, &h, 3.0, -3.0, &cfg()).unwrap();
        let [lo, hi] = r.value.hermitian_eigenvalues();
        let e = f.gap_energy(3.0);
        assert!((lo + e).abs() < 1e-9 && (hi - e).abs() < 1e-9);
    }

    #[test]
    fn dense_trajectories_interpolate() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.5).unwrap();
        let c = cfg();
        let rho0 = f.projectors(-4.0).1;
        let (_, traj) = evolve_state_dense(&f, &gm, 0.3, &rho0, -4.0, 4.0, &c).unwrap();
        let direct = evolve_state(&f, &gm, 0.3, &rho0, -4.0, 1.234, &c).unwrap().value;
        assert!((traj.eval(1.234) - direct).max_abs() < 1e-8);

        let pp = f.projectors(4.0).0;
        let (_, dual) = evolve_dual_dense(&f, &gm, 0.3, &pp, 4.0, -4.0, &c).unwrap();
        let direct = evolve_dual(&f, &gm, 0.3, &pp, 4.0, -0.77, &c).unwrap().value;
        assert!((dual.eval(-0.77) - direct).max_abs() < 1e-8);
        let bp = dual.breakpoints();
        assert!(bp.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(bp[0], -4.0);
        assert_eq!(*bp.last().unwrap(), 4.0);
    }

    #[test]
    fn cptp_report_examples() {
        let rep = cptp_report(&SuperOp::identity());
        assert_eq!(rep.trace_defect, 0.0);
        assert!(rep.choi_min_eig.abs() < 1e-15);

        // unitary channel from a short commutator-only evolution
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        let u = evolve_superop(&f, &zero, 1.0, 0.0, 0.1, &cfg()).unwrap().value;
        let eig = u.choi_eigenvalues();
        assert!((eig[3] - 2.0).abs() < 1e-9);
        assert!(eig[..3].iter().all(|v| v.abs() < 1e-9));
    }
}
