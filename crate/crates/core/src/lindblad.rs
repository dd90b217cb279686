//! Lindblad generators: the general form, the two-level dephasing form
//! `𝓛_s = -i[H_s, ·] + (γ_s/2)𝓓_s`, its kernel projection and the inverse on
//! its range.

use num_complex::Complex64 as C64;

use crate::algebra::{Operator2, SuperOp, DEFAULT_TOL, I};
use crate::error::{Error, Result};
use crate::model::{GammaProfile, LzFamily};

/// `𝓛 = (H, Γ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLindblad {
    h: Operator2,
    jumps: Vec<Operator2>,
}

impl GeneralLindblad {
    pub fn new(h: Operator2, jumps: Vec<Operator2>) -> Result<Self> {
        let deviation = h.hermiticity_defect();
        if deviation > 1e-12 {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(GeneralLindblad { h, jumps })
    }

    pub fn hamiltonian(&self) -> &Operator2 {
        &self.h
    }

    pub fn jumps(&self) -> &[Operator2] {
        &self.jumps
    }

    /// `𝓛ρ = -i[H,ρ] + Σ_α Γ_α ρ Γ_α* - ½(Γ_α*Γ_α ρ + ρ Γ_α*Γ_α)`.
    pub fn superop(&self) -> SuperOp {
        let mut l = SuperOp::commutator(&self.h).scale(-I);
        for g in &self.jumps {
            let gg = g.adjoint() * *g;
            l = l + SuperOp::sandwich(g, &g.adjoint())
                - (SuperOp::left(&gg) + SuperOp::right(&gg)) * 0.5;
        }
        l
    }

    /// Affine gauge transformation `Γ_α ↦ Γ_α + c_α`,
    /// `H ↦ H + e·1 - (i/2)Σ_α(c̄_α Γ_α - c_α Γ_α*)`; leaves [`Self::superop`]
    /// unchanged.
    pub fn gauge_transform(&self, gauge: &GaugeParams) -> Result<Self> {
        if gauge.c.len() != self.jumps.len() {
            return Err(Error::InvalidArgument(format!(
                "gauge has {} coefficients for {} jump operators",
                gauge.c.len(),
                self.jumps.len()
            )));
        }
        let mut h = self.h + Operator2::identity() * gauge.e;
        let mut jumps = Vec::with_capacity(self.jumps.len());
        for (g, &c) in self.jumps.iter().zip(&gauge.c) {
            h += (g.scale(c.conj()) - g.adjoint().scale(c)).scale(C64::new(0.0, -0.5));
            jumps.push(*g + Operator2::identity().scale(c));
        }
        // symmetrize away rounding so the Hermiticity check stays exact
        let h = (h + h.adjoint()) * 0.5;
        GeneralLindblad::new(h, jumps)
    }
}

/// Parameters of an affine gauge transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeParams {
    pub c: Vec<C64>,
    pub e: f64,
}

/// The reduced form `𝓛 = -i[κ(P⁺-P⁻), ·] + (γ/2)𝓓` of a minimally
/// degenerate two-level dephasing Lindbladian, with coherence eigenvalue
/// `λ = -2iκ - 2γ|κ|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimalDephasingForm {
    pub kappa: f64,
    pub gamma: f64,
    pub lambda: C64,
}

/// Reduces `(H̃ = e⁺P⁺ + e⁻P⁻, Γ_α = f_α(H̃))` to its minimal dephasing form.
/// `fvals` holds `(f_α(e⁺), f_α(e⁻))`.
pub fn minimal_form(e_plus: f64, e_minus: f64, fvals: &[(C64, C64)]) -> Result<MinimalDephasingForm> {
    if e_plus == e_minus {
        return Err(Error::DegenerateHamiltonian(e_plus));
    }
    let mut lambda = C64::new(0.0, -(e_plus - e_minus));
    let mut im_cross = 0.0;
    let mut spread = 0.0;
    for &(fp, fm) in fvals {
        let cross = fp * fm.conj();
        lambda += cross - 0.5 * (fp.norm_sqr() + fm.norm_sqr());
        im_cross += cross.im;
        spread += (fp - fm).norm_sqr();
    }
    if lambda.im == 0.0 {
        return Err(Error::NotMinimallyDegenerate);
    }
    let kappa = 0.5 * (e_plus - e_minus - im_cross);
    let gamma = spread / (4.0 * kappa.abs());
    Ok(MinimalDephasingForm { kappa, gamma, lambda })
}

impl MinimalDephasingForm {
    /// The canonical superoperator in the eigenbasis `(P⁺, P⁻)` of `H̃`.
    pub fn superop(&self, p_plus: &Operator2, p_minus: &Operator2) -> SuperOp {
        let h = (*p_plus - *p_minus) * self.kappa;
        // sgn(H)√|H| for eigenvalues ±κ
        let sqrt_h = (*p_plus - *p_minus) * (self.kappa.signum() * self.kappa.abs().sqrt());
        let ad = SuperOp::commutator(&sqrt_h);
        SuperOp::commutator(&h).scale(-I) - (ad * ad) * (0.5 * self.gamma)
    }

    /// `λ` recomputed from `(κ, γ)`.
    pub fn lambda_from_parameters(&self) -> C64 {
        C64::new(-2.0 * self.gamma * self.kappa.abs(), -2.0 * self.kappa)
    }
}

/// `𝓓_s ρ = -[√H_s, [√H_s, ρ]]`.
pub fn dephasing_part(fam: &LzFamily, s: f64) -> SuperOp {
    let ad = SuperOp::commutator(&fam.sqrt_hamiltonian(s));
    (ad * ad) * -1.0
}

/// `𝓛_s = -i[H_s, ·] + (γ_s/2)𝓓_s`.
pub fn dephasing_lindbladian(fam: &LzFamily, s: f64, gamma: &GammaProfile) -> SuperOp {
    SuperOp::commutator(&fam.hamiltonian(s)).scale(-I)
        + dephasing_part(fam, s) * (0.5 * gamma.value(s))
}

/// `𝓓_s` applied directly, without assembling the superoperator. Uses
/// `[√H, [√H, ρ]] = [H, [H, ρ]] / e_s` for traceless `H_s`.
pub fn apply_dephasing_part(fam: &LzFamily, s: f64, rho: &Operator2) -> Operator2 {
    let h = fam.hamiltonian(s);
    let inner = h.commutator(rho);
    h.commutator(&inner) * (-1.0 / fam.gap_energy(s))
}

/// `𝓛_s ρ` for rate value `gamma_s`.
pub fn apply_lindbladian(fam: &LzFamily, s: f64, gamma_s: f64, rho: &Operator2) -> Operator2 {
    let h = fam.hamiltonian(s);
    let c = h.commutator(rho);
    let cc = h.commutator(&c);
    c.scale(-I) + cc * (-0.5 * gamma_s / fam.gap_energy(s))
}

/// `𝓛_s* X = i[H_s, X] + (γ_s/2)𝓓_s X`.
pub fn apply_dual_lindbladian(fam: &LzFamily, s: f64, gamma_s: f64, x: &Operator2) -> Operator2 {
    let h = fam.hamiltonian(s);
    let c = h.commutator(x);
    let cc = h.commutator(&c);
    c.scale(I) + cc * (-0.5 * gamma_s / fam.gap_energy(s))
}

/// `𝓟_s ρ = P⁺ρP⁺ + P⁻ρP⁻`, the projection onto `ker 𝓛_s`.
pub fn kernel_projection(fam: &LzFamily, s: f64) -> SuperOp {
    let (pp, pm) = fam.projectors(s);
    SuperOp::sandwich(&pp, &pp) + SuperOp::sandwich(&pm, &pm)
}

/// `𝓠_s = 1 - 𝓟_s`.
pub fn range_projection(fam: &LzFamily, s: f64) -> SuperOp {
    SuperOp::identity() - kernel_projection(fam, s)
}

/// `𝓟̇_s`, from the product rule on `P⁺ρP⁺ + P⁻ρP⁻`.
pub fn kernel_projection_rate(fam: &LzFamily, s: f64) -> SuperOp {
    let (pp, pm) = fam.projectors(s);
    let (dp, dm) = fam.projector_rate(s);
    SuperOp::sandwich(&dp, &pp)
        + SuperOp::sandwich(&pp, &dp)
        + SuperOp::sandwich(&dm, &pm)
        + SuperOp::sandwich(&pm, &dm)
}

/// Coherence eigenvalue `λ_s = 2(-i - γ_s)e_s`, with `𝓛_s E_s = λ_s E_s`.
pub fn coherence_eigenvalue(fam: &LzFamily, s: f64, gamma_s: f64) -> C64 {
    C64::new(-gamma_s, -1.0) * (2.0 * fam.gap_energy(s))
}

/// `𝓛_s⁻¹ X` for `X` in the off-diagonal sector `ran 𝓠_s`, via its
/// coefficients on `{E_s, E_s*}`.
pub fn inverse_on_range(fam: &LzFamily, s: f64, gamma: &GammaProfile, x: &Operator2) -> Result<Operator2> {
    let [a_plus, a_minus, b_plus, b_minus] = fam.basis_coefficients(s, x);
    let diag_norm = a_plus.norm() + a_minus.norm();
    if diag_norm > DEFAULT_TOL {
        return Err(Error::NotInRange { diag_norm });
    }
    let lambda = coherence_eigenvalue(fam, s, gamma.value(s));
    let eop = fam.coherence_op(s);
    Ok(eop.scale(b_plus / lambda) + eop.adjoint().scale(b_minus / lambda.conj()))
}

/// `𝓛_s⁻¹ 𝓠_s X`: the inverse applied after discarding the kernel component.
pub fn inverse_on_range_projected(fam: &LzFamily, s: f64, gamma: &GammaProfile, x: &Operator2) -> Operator2 {
    let [_, _, b_plus, b_minus] = fam.basis_coefficients(s, x);
    let lambda = coherence_eigenvalue(fam, s, gamma.value(s));
    let eop = fam.coherence_op(s);
    eop.scale(b_plus / lambda) + eop.adjoint().scale(b_minus / lambda.conj())
}

/// `(𝓛_s*)⁻¹ 𝓠_s X`. On the coherences `𝓛_s* E_s = λ̄_s E_s`.
pub fn dual_inverse_on_range_projected(fam: &LzFamily, s: f64, gamma: &GammaProfile, x: &Operator2) -> Operator2 {
    let [_, _, b_plus, b_minus] = fam.basis_coefficients(s, x);
    let lambda = coherence_eigenvalue(fam, s, gamma.value(s));
    let eop = fam.coherence_op(s);
    eop.scale(b_plus / lambda.conj()) + eop.adjoint().scale(b_minus / lambda)
}
