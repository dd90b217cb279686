//! First- and second-order adiabatic expansion terms for the dephasing
//! Landau-Zener Lindbladian, parallel transport along the stationary
//! manifold, and extraction of the second-order remainder.
//!
//! Dual-direction terms describe the dual evolution of `P_T^±` backwards from
//! an anchor `T`. They are evaluated at the physical time `τ ≤ T` and come
//! from the expansion in the reversed variable `t = -τ`, where the generator
//! is `𝓛*_{-t}`.

use num_complex::Complex64 as C64;

use crate::algebra::{Operator2, SuperOp};
use crate::error::{Error, Result};
use crate::lindblad::{
    dual_inverse_on_range_projected, inverse_on_range_projected, kernel_projection,
    kernel_projection_rate,
};
use crate::model::{GammaProfile, LzFamily};
use crate::ode::{integrate, DenseMode, IntegratorConfig, StepStats};
use crate::quad::integrate_sinh;

/// Absolute tolerance for the `γ/((1+γ²)e⁵)` integrals.
pub const QUAD_TOL: f64 = 1e-12;

/// Step for the central difference behind `ḃ`.
pub const B_RATE_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn projector(self, fam: &LzFamily, s: f64) -> Operator2 {
        let (pp, pm) = fam.projectors(s);
        match self {
            Sign::Plus => pp,
            Sign::Minus => pm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `ε ρ̇ = 𝓛_s ρ` forward from `s'` to `s ≥ s'`.
    Forward,
    /// Dual evolution from the anchor `T` down to `τ ≤ T`.
    Dual,
}

/// An `(a, b)` pair with the arguments that produced it. For
/// [`Direction::Dual`], `s` is the evaluation time `τ` and `s_prime` the
/// anchor `T ≥ τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub a: Operator2,
    pub b: Operator2,
    pub s: f64,
    pub s_prime: f64,
    pub sign: Sign,
    pub direction: Direction,
}

impl ExpansionTerm {
    pub fn new(fam: &LzFamily, gamma: &GammaProfile, s: f64, s_prime: f64, sign: Sign, direction: Direction) -> Result<Self> {
        let (a, b) = match direction {
            Direction::Forward => (
                first_order_a(fam, gamma, s, s_prime, sign)?,
                second_order_b(fam, gamma, s, s_prime, sign, direction)?,
            ),
            Direction::Dual => (
                first_order_a_hat(fam, gamma, s, s_prime, sign)?,
                second_order_b(fam, gamma, s, s_prime, sign, direction)?,
            ),
        };
        Ok(ExpansionTerm { a, b, s, s_prime, sign, direction })
    }
}

fn check_order(lo: f64, hi: f64, what: &str) -> Result<()> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        Err(Error::InvalidArgument(format!("{what}: need {lo} ≤ {hi}")))
    } else {
        Ok(())
    }
}

/// `∫_lo^hi γ_τ/((1+γ_τ²)e_τ⁵) dτ`. Either limit may be infinite; reversed
/// limits give the negated value.
pub fn dephasing_weight_integral(fam: &LzFamily, gamma: &GammaProfile, lo: f64, hi: f64) -> Result<f64> {
    if gamma.is_zero() || lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return dephasing_weight_integral(fam, gamma, hi, lo).map(|v| -v);
    }
    let weight = gamma.sup().min(0.5);
    let r = integrate_sinh(
        |t| {
            let gs = gamma.value(t);
            gs / ((1.0 + gs * gs) * fam.gap_energy(t).powi(5))
        },
        fam.g(),
        lo,
        hi,
        QUAD_TOL,
        // e_τ ≥ |τ|/2
        |x| 8.0 * weight / x.powi(4),
    )?;
    Ok(r.value)
}

/// `i - γ`, or its conjugate.
fn rate_factor(gamma_s: f64, conjugate: bool) -> C64 {
    C64::new(-gamma_s, if conjugate { -1.0 } else { 1.0 })
}

fn add_hc(eop: &Operator2, c: C64) -> Operator2 {
    eop.scale(c) + eop.adjoint().scale(c.conj())
}

/// The closed form of `a^±` with the integral supplied and the option of
/// conjugating the rate factor.
fn a_closed(fam: &LzFamily, s: f64, gamma_s: f64, integral: f64, sign: Sign, conjugate: bool) -> Operator2 {
    let g = fam.g();
    let e = fam.gap_energy(s);
    let (pp, pm) = fam.projectors(s);
    let z = rate_factor(gamma_s, conjugate);
    let coherent = add_hc(&fam.coherence_op(s), z) * (g / (16.0 * (1.0 + gamma_s * gamma_s) * e.powi(3)));
    let kernel = (pm - pp) * (g * g / 64.0 * integral);
    (coherent + kernel) * sign.factor()
}

/// `a^±_{s,s'}`, the first-order term for the forward evolution of `P^±_{s'}`.
pub fn first_order_a(fam: &LzFamily, gamma: &GammaProfile, s: f64, s_prime: f64, sign: Sign) -> Result<Operator2> {
    check_order(s_prime, s, "first_order_a")?;
    let integral = dephasing_weight_integral(fam, gamma, s_prime, s)?;
    Ok(a_closed(fam, s, gamma.value(s), integral, sign, false))
}

/// `â^±` at physical time `tau` for the dual evolution of `P^±_anchor`,
/// `anchor ≥ tau`. Equal to the negated, rate-conjugated `a^±` closed form
/// taken at `(tau, anchor)`:
/// `â⁺ = -g((i-γ)E* + h.c.)/(16(1+γ²)e³) + (g²/64)(P⁺-P⁻)∫_anchor^tau`.
pub fn first_order_a_hat(fam: &LzFamily, gamma: &GammaProfile, tau: f64, anchor: f64, sign: Sign) -> Result<Operator2> {
    check_order(tau, anchor, "first_order_a_hat")?;
    let integral = dephasing_weight_integral(fam, gamma, anchor, tau)?;
    Ok(-a_closed(fam, tau, gamma.value(tau), integral, sign, true))
}

fn b_closed(fam: &LzFamily, s: f64, gamma: &GammaProfile, integral: f64, sign: Sign, conjugate: bool) -> Operator2 {
    let g = fam.g();
    let e = fam.gap_energy(s);
    let (gs, gdot, _) = gamma.derivatives(s);
    let onep = 1.0 + gs * gs;
    let z = rate_factor(gs, conjugate);
    let eop = fam.coherence_op(s);
    let integral_term = add_hc(&eop, z) * (g.powi(3) * integral / (512.0 * onep * e.powi(3)));
    let bracket = z * (3.0 * s / (4.0 * e * e)) + gdot + z * (2.0 * gdot * gs / onep);
    let c = z * bracket * (g / (32.0 * onep * onep * e.powi(4)));
    (integral_term + add_hc(&eop, c)) * -sign.factor()
}

/// `b^±`, the second-order kernel. Forward: arguments `(s, s')`, `s ≥ s'`.
/// Dual: arguments `(τ, T)`, `T ≥ τ`; every rate factor is conjugated and the
/// integral runs `∫_T^τ`.
pub fn second_order_b(
    fam: &LzFamily,
    gamma: &GammaProfile,
    s: f64,
    s_prime: f64,
    sign: Sign,
    direction: Direction,
) -> Result<Operator2> {
    match direction {
        Direction::Forward => {
            check_order(s_prime, s, "second_order_b")?;
            let integral = dephasing_weight_integral(fam, gamma, s_prime, s)?;
            Ok(b_closed(fam, s, gamma, integral, sign, false))
        }
        Direction::Dual => {
            check_order(s, s_prime, "second_order_b (dual)")?;
            let integral = dephasing_weight_integral(fam, gamma, s_prime, s)?;
            Ok(b_closed(fam, s, gamma, integral, sign, true))
        }
    }
}

/// Supremum of a scaled trace norm over a grid, and where it was attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundScan {
    pub max_scaled: f64,
    pub argmax: f64,
}

impl BoundScan {
    fn empty() -> Self {
        BoundScan { max_scaled: 0.0, argmax: f64::NAN }
    }

    fn update(&mut self, s: f64, v: f64) {
        if !(v <= self.max_scaled) {
            self.max_scaled = v;
            self.argmax = s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.max_scaled.is_finite()
    }
}

/// `max_s ‖b^±_{s,s'}‖₁ e_s³` over the grid points `s ≥ s'`.
pub fn b_bound_scan(fam: &LzFamily, gamma: &GammaProfile, s_prime: f64, grid: &[f64], sign: Sign) -> Result<BoundScan> {
    let mut scan = BoundScan::empty();
    for &s in grid.iter().filter(|&&s| s >= s_prime) {
        let b = second_order_b(fam, gamma, s, s_prime, sign, Direction::Forward)?;
        scan.update(s, b.trace_norm() * fam.gap_energy(s).powi(3));
    }
    Ok(scan)
}

/// `max_s ‖ḃ^±_{s,s'}‖₁ e_s³`, with `ḃ` from a central difference of step
/// [`B_RATE_STEP`]. Grid points closer than one step to `s'` are skipped.
pub fn b_rate_bound_check(fam: &LzFamily, gamma: &GammaProfile, s_prime: f64, grid: &[f64], sign: Sign) -> Result<BoundScan> {
    let h = B_RATE_STEP;
    let mut scan = BoundScan::empty();
    for &s in grid.iter().filter(|&&s| s - h >= s_prime) {
        let up = second_order_b(fam, gamma, s + h, s_prime, sign, Direction::Forward)?;
        let down = second_order_b(fam, gamma, s - h, s_prime, sign, Direction::Forward)?;
        let bdot = (up - down) * (0.5 / h);
        scan.update(s, bdot.trace_norm() * fam.gap_energy(s).powi(3));
    }
    Ok(scan)
}

/// `P^±_{s'} + ε a^±_{s',s'}`, the initial state whose evolution has the
/// expansion `P_s + ε a_{s,s'} + ε² r`.
pub fn expansion_initial_state(fam: &LzFamily, gamma: &GammaProfile, epsilon: f64, s_prime: f64, sign: Sign) -> Result<Operator2> {
    Ok(sign.projector(fam, s_prime) + first_order_a(fam, gamma, s_prime, s_prime, sign)? * epsilon)
}

/// `r = (ρ - P^±_s - ε a^±_{s,s'}) / ε²` for a state `ρ` propagated from
/// [`expansion_initial_state`].
pub fn remainder_extract(
    fam: &LzFamily,
    gamma: &GammaProfile,
    epsilon: f64,
    s_prime: f64,
    s: f64,
    sign: Sign,
    rho: &Operator2,
) -> Result<Operator2> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let a = first_order_a(fam, gamma, s, s_prime, sign)?;
    Ok((*rho - sign.projector(fam, s) - a * epsilon) * (1.0 / (epsilon * epsilon)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportResult {
    pub transport: SuperOp,
    pub s: f64,
    pub s_prime: f64,
    pub stats: StepStats,
    /// `max |𝓣𝓟_{s'} - 𝓟_s𝓣|` entrywise.
    pub intertwining_defect: f64,
}

/// `[𝓟̇_s, 𝓟_s]`.
pub fn transport_generator(fam: &LzFamily, s: f64) -> SuperOp {
    let p = kernel_projection(fam, s);
    let pd = kernel_projection_rate(fam, s);
    pd * p - p * pd
}

/// Solves `∂_s𝓣 = [𝓟̇_s, 𝓟_s]𝓣`, `𝓣(s', s') = 1`, up to `s ≥ s'`.
pub fn parallel_transport(fam: &LzFamily, s_prime: f64, s: f64, tol: f64) -> Result<TransportResult> {
    check_order(s_prime, s, "parallel_transport")?;
    let cfg = IntegratorConfig {
        rtol: tol,
        atol: tol * 1e-2,
        max_step: 0.5 * fam.g(),
        min_step: 1e-14,
        initial_step: 1e-3 * fam.g(),
    };
    let sol = integrate(
        |t, y: &[C64; 16]| (transport_generator(fam, t) * SuperOp::from_flat(y)).to_flat(),
        s_prime,
        SuperOp::identity().to_flat(),
        s,
        &cfg,
        DenseMode::None,
    )?;
    let transport = SuperOp::from_flat(&sol.y);
    let intertwining_defect =
        (transport * kernel_projection(fam, s_prime) - kernel_projection(fam, s) * transport).max_abs();
    Ok(TransportResult { transport, s, s_prime, stats: sol.stats, intertwining_defect })
}

/// `a` and `b` computed from their defining integrals rather than the closed
/// forms: the kernel part of `a` solves
/// `Ẏ = [𝓟̇, 𝓟]Y + 𝓟̇𝓛⁻¹Ṗ`, `Y(s') = 0`, and
/// `b = 𝓛⁻¹𝓟̇Y + 𝓛⁻¹𝓠 d/ds(𝓛⁻¹Ṗ)` with the derivative from a five-point
/// stencil. Arguments follow [`ExpansionTerm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefinitionalTerms {
    pub a: Operator2,
    pub b: Operator2,
}

pub fn definitional_terms(
    fam: &LzFamily,
    gamma: &GammaProfile,
    s: f64,
    s_prime: f64,
    sign: Sign,
    direction: Direction,
) -> Result<DefinitionalTerms> {
    // Chart variable t with physical time d·t.
    let (d, t0, t1) = match direction {
        Direction::Forward => {
            check_order(s_prime, s, "definitional_terms")?;
            (1.0, s_prime, s)
        }
        Direction::Dual => {
            check_order(s, s_prime, "definitional_terms (dual)")?;
            (-1.0, -s_prime, -s)
        }
    };
    let phys = |t: f64| d * t;
    let inv = |t: f64, x: &Operator2| match direction {
        Direction::Forward => inverse_on_range_projected(fam, phys(t), gamma, x),
        Direction::Dual => dual_inverse_on_range_projected(fam, phys(t), gamma, x),
    };
    let pdot = |t: f64| fam.projector_rate(phys(t)).0 * (d * sign.factor());
    let kpdot = |t: f64| kernel_projection_rate(fam, phys(t)) * d;
    let u = |t: f64| inv(t, &pdot(t));

    let cfg = IntegratorConfig { rtol: 1e-12, atol: 1e-15, max_step: 0.25, min_step: 1e-14, initial_step: 1e-4 };
    let sol = integrate(
        |t, y: &[C64; 4]| {
            let yop = Operator2::devectorize(y);
            let kp = kernel_projection(fam, phys(t));
            let kd = kpdot(t);
            let gen = kd * kp - kp * kd;
            (gen.apply(&yop) + kd.apply(&u(t))).vectorize()
        },
        t0,
        [C64::new(0.0, 0.0); 4],
        t1,
        &cfg,
        DenseMode::None,
    )?;
    let y = Operator2::devectorize(&sol.y);
    let a = u(t1) + y;

    let h = 1e-3;
    let du = (u(t1 - 2.0 * h) - u(t1 - h) * 8.0 + u(t1 + h) * 8.0 - u(t1 + 2.0 * h)) * (1.0 / (12.0 * h));
    let b = inv(t1, &kpdot(t1).apply(&y)) + inv(t1, &du);
    Ok(DefinitionalTerms { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{apply_lindbladian, inverse_on_range};

    fn fam(g: f64) -> LzFamily {
        LzFamily::new(g).unwrap()
    }

    fn profiles() -> Vec<GammaProfile> {
        vec![
            GammaProfile::constant(0.0).unwrap(),
            GammaProfile::constant(0.7).unwrap(),
            GammaProfile::gaussian_bump(1.0, 4.0).unwrap(),
            GammaProfile::logistic(0.5, 2.0).unwrap(),
        ]
    }

    fn close(a: &Operator2, b: &Operator2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn weight_integral_constant_gamma_closed_form() {
        // ∫_ℝ e⁻⁵ = 32·4/(3g⁴)
        let f = fam(1.0);
        let gm = GammaProfile::constant(1.0).unwrap();
        let v = dephasing_weight_integral(&f, &gm, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((v - 0.5 * 128.0 / 3.0).abs() < 1e-10, "{v}");
        let w = dephasing_weight_integral(&f, &gm, 2.0, -1.0).unwrap();
        let x = dephasing_weight_integral(&f, &gm, -1.0, 2.0).unwrap();
        assert_eq!(w, -x);
    }

    #[test]
    fn a_minus_without_dephasing() {
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        for &(s, sp) in &[(0.0, -3.0), (2.5, -10.0), (-1.0, -1.0)] {
            let a = first_order_a(&f, &zero, s, sp, Sign::Minus).unwrap();
            let e = f.gap_energy(s);
            let eop = f.coherence_op(s);
            let expected = add_hc(&eop.adjoint(), C64::new(0.0, 1.0)) * (1.0 / (16.0 * e.powi(3)));
            assert!(close(&a, &expected, 1e-15));
            assert!((a.trace_norm() - 1.0 / (8.0 * e.powi(3))).abs() < 1e-12);
        }
        let a0 = first_order_a(&f, &zero, 0.0, -5.0, Sign::Minus).unwrap();
        assert!((a0.trace_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn a_signs_are_opposite() {
        let f = fam(1.3);
        for gm in profiles() {
            let ap = first_order_a(&f, &gm, 0.4, -6.0, Sign::Plus).unwrap();
            let am = first_order_a(&f, &gm, 0.4, -6.0, Sign::Minus).unwrap();
            assert!(close(&ap, &-am, 0.0));
            assert!(ap.trace().norm() < 1e-15);
            assert!(ap.is_hermitian(1e-15));
        }
    }

    #[test]
    fn a_hat_coherent_part() {
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        let ah = first_order_a_hat(&f, &zero, 1.5, 7.0, Sign::Plus).unwrap();
        let e = f.gap_energy(1.5);
        let eop = f.coherence_op(1.5);
        let expected = add_hc(&eop.adjoint(), C64::new(0.0, 1.0)) * (-1.0 / (16.0 * e.powi(3)));
        assert!(close(&ah, &expected, 1e-15));

        // coherent part only: anchor = τ
        let one = GammaProfile::constant(1.0).unwrap();
        let at = first_order_a_hat(&f, &one, 0.0, 0.0, Sign::Plus).unwrap();
        assert!((at.trace_norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn a_hat_is_conjugated_a_with_reversed_integral() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.6).unwrap();
        let (tau, anchor) = (-0.7, 4.0);
        let ah = first_order_a_hat(&f, &gm, tau, anchor, Sign::Plus).unwrap();
        // a⁺ with i → -i in its coherent part and the integral sign flipped
        let e = f.gap_energy(tau);
        let (pp, pm) = f.projectors(tau);
        let z = C64::new(-0.6, -1.0);
        let coh = add_hc(&f.coherence_op(tau), z) * (1.0 / (16.0 * 1.36 * e.powi(3)));
        let integral = dephasing_weight_integral(&f, &gm, tau, anchor).unwrap();
        let kern = (pm - pp) * (integral / 64.0);
        let expected = -(coh - kern);
        assert!(close(&ah, &expected, 1e-15));
    }

    #[test]
    fn b_vanishes_at_crossing_without_dephasing() {
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let b = second_order_b(&f, &zero, 0.0, -4.0, sign, Direction::Forward).unwrap();
            assert!(b.max_abs() < 1e-16);
        }
    }

    #[test]
    fn closed_forms_match_definitions_forward() {
        let f = fam(1.0);
        for gm in profiles() {
            for &(s, sp) in &[(1.0, -3.0), (0.0, -5.0), (-2.0, -6.0), (4.0, 0.5)] {
                for sign in [Sign::Plus, Sign::Minus] {
                    let def = definitional_terms(&f, &gm, s, sp, sign, Direction::Forward).unwrap();
                    let a = first_order_a(&f, &gm, s, sp, sign).unwrap();
                    let b = second_order_b(&f, &gm, s, sp, sign, Direction::Forward).unwrap();
                    assert!(close(&a, &def.a, 1e-9), "a {gm} ({s},{sp}): {:?} vs {:?}", a, def.a);
                    assert!(close(&b, &def.b, 1e-8), "b {gm} ({s},{sp}): {:?} vs {:?}", b, def.b);
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_definitions_dual() {
        let f = fam(1.0);
        for gm in profiles() {
            for &(tau, anchor) in &[(-1.0, 3.0), (0.0, 5.0), (2.0, 6.0), (-4.0, -0.5)] {
                for sign in [Sign::Plus, Sign::Minus] {
                    let def = definitional_terms(&f, &gm, tau, anchor, sign, Direction::Dual).unwrap();
                    let a = first_order_a_hat(&f, &gm, tau, anchor, sign).unwrap();
                    let b = second_order_b(&f, &gm, tau, anchor, sign, Direction::Dual).unwrap();
                    assert!(close(&a, &def.a, 1e-9), "â {gm} ({tau},{anchor}): {:?} vs {:?}", a, def.a);
                    assert!(close(&b, &def.b, 1e-8), "b̃ {gm} ({tau},{anchor}): {:?} vs {:?}", b, def.b);
                }
            }
        }
    }

    #[test]
    fn first_term_is_inverse_of_projector_rate_without_dephasing() {
        let f = fam(0.8);
        let zero = GammaProfile::constant(0.0).unwrap();
        for &s in &[-3.0, 0.0, 0.4, 7.0] {
            let (_, pm_dot) = f.projector_rate(s);
            let direct = inverse_on_range(&f, s, &zero, &pm_dot).unwrap();
            let a = first_order_a(&f, &zero, s, s - 2.0, Sign::Minus).unwrap();
            assert!(close(&a, &direct, 1e-15));
            // 𝓛 a = Ṗ
            assert!(close(&apply_lindbladian(&f, s, 0.0, &a), &pm_dot, 1e-14));
        }
    }

    #[test]
    fn kernel_part_of_inverse_vanishes() {
        let f = fam(1.0);
        let gm = GammaProfile::gaussian_bump(1.0, 2.0).unwrap();
        for &s in &[-2.0, 0.0, 3.0] {
            let (pp_dot, _) = f.projector_rate(s);
            let x = inverse_on_range_projected(&f, s, &gm, &pp_dot);
            assert!(kernel_projection(&f, s).apply(&x).max_abs() < 1e-16);
        }
    }

    #[test]
    fn b_bounds_are_finite() {
        let f = fam(1.0);
        let grid: Vec<f64> = (0..=200).map(|k| -50.0 + 0.5 * k as f64).collect();
        for gm in profiles() {
            let scan = b_bound_scan(&f, &gm, -50.0, &grid, Sign::Minus).unwrap();
            assert!(scan.is_finite() && scan.max_scaled > 0.0, "{gm}: {scan:?}");
            let rate = b_rate_bound_check(&f, &gm, -50.0, &grid, Sign::Minus).unwrap();
            assert!(rate.is_finite(), "{gm}: {rate:?}");
        }
    }

    #[test]
    fn b_rate_nonzero_at_crossing_without_dephasing() {
        let f = fam(1.0);
        let zero = GammaProfile::constant(0.0).unwrap();
        let scan = b_rate_bound_check(&f, &zero, -1.0, &[0.0], Sign::Minus).unwrap();
        // ḃ(0) = -(3g/(128e⁶))(E + E*), trace norm 3g/(64e⁶)
        let e = f.gap_energy(0.0);
        assert!((scan.max_scaled - 3.0 / (64.0 * e.powi(3))).abs() < 1e-6, "{scan:?}");
    }

    #[test]
    fn remainder_vanishes_at_start() {
        let f = fam(1.0);
        let gm = GammaProfile::gaussian_bump(1.0, 4.0).unwrap();
        let rho0 = expansion_initial_state(&f, &gm, 0.2, -3.0, Sign::Minus).unwrap();
        let r = remainder_extract(&f, &gm, 0.2, -3.0, -3.0, Sign::Minus, &rho0).unwrap();
        assert!(r.max_abs() < 1e-13);
        assert!(remainder_extract(&f, &gm, 0.0, -3.0, -3.0, Sign::Minus, &rho0).is_err());
    }

    #[test]
    fn transport_identity_and_kernel() {
        let f = fam(1.0);
        let id = parallel_transport(&f, 2.0, 2.0, 1e-10).unwrap();
        assert_eq!(id.transport, SuperOp::identity());

        let tol = 1e-10;
        let tr = parallel_transport(&f, -5.0, 5.0, tol).unwrap();
        let moved = tr.transport.apply(&f.projectors(-5.0).1);
        assert!((moved - f.projectors(5.0).1).trace_norm() <= 10.0 * tol);
        assert!(tr.intertwining_defect <= 10.0 * tol);
    }

    #[test]
    fn transport_composes() {
        let f = fam(1.0);
        let tol = 1e-10;
        let whole = parallel_transport(&f, -4.0, 3.0, tol).unwrap().transport;
        let first = parallel_transport(&f, -4.0, 0.5, tol).unwrap().transport;
        let second = parallel_transport(&f, 0.5, 3.0, tol).unwrap().transport;
        assert!((second * first - whole).max_abs() <= 10.0 * tol);
    }

    #[test]
    fn argument_order_is_checked() {
        let f = fam(1.0);
        let gm = GammaProfile::constant(0.5).unwrap();
        assert!(first_order_a(&f, &gm, -1.0, 1.0, Sign::Plus).is_err());
        assert!(first_order_a_hat(&f, &gm, 1.0, -1.0, Sign::Plus).is_err());
        assert!(second_order_b(&f, &gm, 2.0, 1.0, Sign::Plus, Direction::Dual).is_err());
        assert!(parallel_transport(&f, 1.0, 0.0, 1e-10).is_err());
    }
}
