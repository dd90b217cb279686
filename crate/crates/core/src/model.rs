//! The Landau-Zener family `H_s = ½[[s, g], [g, -s]]` and dephasing-rate
//! profiles `s ↦ γ_s`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::algebra::Operator2;
use crate::error::{Error, Result};

/// Landau-Zener Hamiltonian family with gap parameter `g > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LzFamily {
    g: f64,
}

/// `2e_s ± |s|` evaluated without cancellation.
#[derive(Clone, Copy, Debug)]
struct GapSplit {
    e: f64,
    /// `2e_s - |s|`, computed as `g² / (2e_s + |s|)`.
    lo: f64,
    /// `2e_s + |s|`.
    hi: f64,
}

impl LzFamily {
    pub fn new(g: f64) -> Result<Self> {
        if g.is_finite() && g > 0.0 {
            Ok(LzFamily { g })
        } else {
            Err(Error::NonPositiveGap(g))
        }
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    fn split(&self, s: f64) -> GapSplit {
        let e = self.gap_energy(s);
        let hi = 2.0 * e + s.abs();
        GapSplit { e, lo: self.g * self.g / hi, hi }
    }

    pub fn hamiltonian(&self, s: f64) -> Operator2 {
        Operator2::real(0.5 * s, 0.5 * self.g, 0.5 * self.g, -0.5 * s)
    }

    /// `e_s = ½√(s² + g²)`; the eigenvalues of `H_s` are `±e_s`.
    pub fn gap_energy(&self, s: f64) -> f64 {
        0.5 * s.hypot(self.g)
    }

    /// Spectral projections `(P⁺_s, P⁻_s)`.
    pub fn projectors(&self, s: f64) -> (Operator2, Operator2) {
        let GapSplit { e, lo, hi } = self.split(s);
        let (up, down) = if s >= 0.0 { (hi, lo) } else { (lo, hi) };
        let q = 1.0 / (4.0 * e);
        let off = self.g * q;
        (
            Operator2::real(up * q, off, off, down * q),
            Operator2::real(down * q, -off, -off, up * q),
        )
    }

    /// The real coherence operator `E_s = |ψ⁺⟩⟨ψ⁻|`,
    /// `E_s = (1/4e_s)[[g, -s-2e_s], [-s+2e_s, -g]]`.
    pub fn coherence_op(&self, s: f64) -> Operator2 {
        let GapSplit { e, lo, hi } = self.split(s);
        // (-s - 2e, -s + 2e)
        let (upper, lower) = if s >= 0.0 { (-hi, lo) } else { (-lo, hi) };
        let q = 1.0 / (4.0 * e);
        Operator2::real(self.g * q, upper * q, lower * q, -self.g * q)
    }

    /// `(Ṗ⁺_s, Ṗ⁻_s)` with `Ṗ±_s = ±(g/8e_s²)(E_s + E_s*)`.
    pub fn projector_rate(&self, s: f64) -> (Operator2, Operator2) {
        let e = self.gap_energy(s);
        let eop = self.coherence_op(s);
        let plus = (eop + eop.adjoint()) * (self.g / (8.0 * e * e));
        (plus, -plus)
    }

    /// `Ė_s = -(g/8e_s²)(P⁺_s - P⁻_s)`.
    pub fn edot(&self, s: f64) -> Operator2 {
        let e = self.gap_energy(s);
        let (pp, pm) = self.projectors(s);
        (pp - pm) * (-self.g / (8.0 * e * e))
    }

    /// `tr(P⁻(Ṗ⁺)²P⁻) = g²/(64 e_s⁴)`.
    pub fn fs_velocity(&self, s: f64) -> f64 {
        let e = self.gap_energy(s);
        self.g * self.g / (64.0 * e.powi(4))
    }

    /// `sgn(H_s)√|H_s| = √e_s (P⁺_s - P⁻_s)`.
    pub fn sqrt_hamiltonian(&self, s: f64) -> Operator2 {
        let (pp, pm) = self.projectors(s);
        (pp - pm) * self.gap_energy(s).sqrt()
    }

    /// Decomposes `X = a₊P⁺ + a₋P⁻ + b₊E + b₋E*` (orthonormal basis).
    pub fn basis_coefficients(&self, s: f64, x: &Operator2) -> [C64; 4] {
        let (pp, pm) = self.projectors(s);
        let eop = self.coherence_op(s);
        [
            pp.hs_inner(x),
            pm.hs_inner(x),
            eop.hs_inner(x),
            eop.adjoint().hs_inner(x),
        ]
    }
}

/// A bounded, twice differentiable dephasing rate `s ↦ γ_s ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaProfile {
    /// `γ_s = γ₀`.
    Constant { amplitude: f64 },
    /// `γ_s = γ₀ exp(-s²/(2w²))`, centered at the avoided crossing.
    GaussianBump { amplitude: f64, width: f64 },
    /// `γ_s = γ₀ / (1 + exp(-s/w))`.
    Logistic { amplitude: f64, width: f64 },
}

impl GammaProfile {
    pub fn constant(amplitude: f64) -> Result<Self> {
        let p = GammaProfile::Constant { amplitude };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian_bump(amplitude: f64, width: f64) -> Result<Self> {
        let p = GammaProfile::GaussianBump { amplitude, width };
        p.validate()?;
        Ok(p)
    }

    pub fn logistic(amplitude: f64, width: f64) -> Result<Self> {
        let p = GammaProfile::Logistic { amplitude, width };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidProfile {
            descriptor: self.to_string(),
            reason: reason.to_string(),
        };
        let amp = self.sup();
        if !(amp.is_finite() && amp >= 0.0) {
            return Err(bad("gamma amplitude must be ≥ 0"));
        }
        match *self {
            GammaProfile::Constant { .. } => Ok(()),
            GammaProfile::GaussianBump { width, .. } | GammaProfile::Logistic { width, .. } => {
                if width.is_finite() && width > 0.0 {
                    Ok(())
                } else {
                    Err(bad("width must be > 0"))
                }
            }
        }
    }

    /// `sup_s γ_s`.
    pub fn sup(&self) -> f64 {
        match *self {
            GammaProfile::Constant { amplitude }
            | GammaProfile::GaussianBump { amplitude, .. }
            | GammaProfile::Logistic { amplitude, .. } => amplitude,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup() == 0.0
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivatives(s).0
    }

    pub fn rate(&self, s: f64) -> f64 {
        self.derivatives(s).1
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.derivatives(s).2
    }

    /// `(γ_s, γ̇_s, γ̈_s)`.
    pub fn derivatives(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            GammaProfile::Constant { amplitude } => (amplitude, 0.0, 0.0),
            GammaProfile::GaussianBump { amplitude, width } => {
                let w2 = width * width;
                let v = amplitude * (-0.5 * s * s / w2).exp();
                (v, -v * s / w2, v * (s * s / w2 - 1.0) / w2)
            }
            GammaProfile::Logistic { amplitude, width } => {
                let x = s / width;
                // σ(x) and σ(x)(1 - σ(x)) without overflow for large |x|
                let sig = if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let ex = x.exp();
                    ex / (1.0 + ex)
                };
                let d = sig * (1.0 - sig);
                (
                    amplitude * sig,
                    amplitude * d / width,
                    amplitude * d * (1.0 - 2.0 * sig) / (width * width),
                )
            }
        }
    }
}

impl fmt::Display for GammaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GammaProfile::Constant { amplitude } => write!(f, "const:{amplitude}"),
            GammaProfile::GaussianBump { amplitude, width } => {
                write!(f, "gauss:{amplitude}:{width}")
            }
            GammaProfile::Logistic { amplitude, width } => {
                write!(f, "logistic:{amplitude}:{width}")
            }
        }
    }
}

const PROFILE_GRAMMAR: &str = "expected const:A, gauss:A:W or logistic:A:W";

impl FromStr for GammaProfile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::InvalidProfile {
            descriptor: text.to_string(),
            reason,
        };
        let parts: Vec<&str> = text.trim().split(':').map(str::trim).collect();
        let nums = parts[1..]
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad(format!("{p:?} is not a number; {PROFILE_GRAMMAR}"))))
            .collect::<Result<Vec<f64>>>()?;
        let profile = match (parts[0], nums.as_slice()) {
            ("const", [a]) => GammaProfile::Constant { amplitude: *a },
            ("gauss", [a, w]) => GammaProfile::GaussianBump { amplitude: *a, width: *w },
            ("logistic", [a, w]) => GammaProfile::Logistic { amplitude: *a, width: *w },
            _ => return Err(bad(PROFILE_GRAMMAR.to_string())),
        };
        profile.validate().map_err(|e| match e {
            Error::InvalidProfile { reason, .. } => bad(reason),
            other => other,
        })?;
        Ok(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(g: f64) -> LzFamily {
        LzFamily::new(g).unwrap()
    }

    fn assert_op_close(a: &Operator2, b: &Operator2, tol: f64) {
        let d = (*a - *b).max_abs();
        assert!(d <= tol, "operators differ by {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn rejects_nonpositive_gap() {
        assert_eq!(LzFamily::new(0.0), Err(Error::NonPositiveGap(0.0)));
        assert!(LzFamily::new(-1.0).is_err());
        assert!(LzFamily::new(f64::NAN).is_err());
    }

    #[test]
    fn hamiltonian_substitution() {
        let f = fam(1.0);
        assert_op_close(&f.hamiltonian(0.0), &Operator2::real(0.0, 0.5, 0.5, 0.0), 0.0);
        assert_op_close(&f.hamiltonian(2.0), &Operator2::real(1.0, 0.5, 0.5, -1.0), 0.0);
        assert_eq!(f.hamiltonian(3.7).trace().norm(), 0.0);
    }

    #[test]
    fn gap_energy_values() {
        let f = fam(1.0);
        assert_eq!(f.gap_energy(0.0), 0.5);
        assert!((f.gap_energy(3f64.sqrt()) - 1.0).abs() < 1e-15);
        assert!(f.gap_energy(0.1) > 0.5);
    }

    #[test]
    fn projectors_at_crossing() {
        let (pp, pm) = fam(1.0).projectors(0.0);
        assert_op_close(&pp, &Operator2::real(0.5, 0.5, 0.5, 0.5), 1e-16);
        assert_op_close(&pm, &Operator2::real(0.5, -0.5, -0.5, 0.5), 1e-16);
    }

    #[test]
    fn projectors_far_from_crossing() {
        let f = fam(1.0);
        let (pp, _) = f.projectors(1e4);
        assert!((pp - Operator2::real(1.0, 0.0, 0.0, 0.0)).max_abs() <= 1e-4);
        // lower diagonal entry keeps full relative precision
        let exact = 0.5 * (1.0 - 1e4 / (1e8f64 + 1.0).sqrt());
        let got = pp.get(1, 1).re;
        assert!(((got - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn coherence_op_at_crossing() {
        let eop = fam(1.0).coherence_op(0.0);
        assert_op_close(&eop, &Operator2::real(0.5, -0.5, 0.5, -0.5), 1e-16);
        assert!((eop.trace_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherence_op_relations() {
        for &g in &[0.3, 1.0, 2.5] {
            let f = fam(g);
            for &s in &[-40.0, -3.0, -0.2, 0.0, 0.7, 5.0, 60.0] {
                let (pp, pm) = f.projectors(s);
                let e = f.coherence_op(s);
                assert_op_close(&(e * e.adjoint()), &pp, 1e-14);
                assert_op_close(&(e.adjoint() * e), &pm, 1e-14);
                assert_op_close(&(pp * e * pm), &e, 1e-14);
                assert!(e.trace().norm() < 1e-15);
                assert!(e.0.iter().all(|z| z.im == 0.0));
            }
        }
    }

    #[test]
    fn projector_rate_at_crossing() {
        let (pp, pm) = fam(1.0).projector_rate(0.0);
        assert_op_close(&pp, &Operator2::real(0.5, 0.0, 0.0, -0.5), 1e-15);
        assert_op_close(&(pp + pm), &Operator2::zero(), 0.0);
    }

    #[test]
    fn edot_at_crossing() {
        let ed = fam(1.0).edot(0.0);
        assert_op_close(&ed, &Operator2::real(0.0, -0.5, -0.5, 0.0), 1e-15);
        assert_eq!(ed.trace().norm(), 0.0);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for &g in &[0.5, 1.0, 2.0] {
            let f = fam(g);
            for &s in &[-7.0, -1.0, 0.0, 0.3, 4.0] {
                let fd_p = (f.projectors(s + h).0 - f.projectors(s - h).0) * (0.5 / h);
                assert_op_close(&fd_p, &f.projector_rate(s).0, 1e-8);
                let fd_e = (f.coherence_op(s + h) - f.coherence_op(s - h)) * (0.5 / h);
                assert_op_close(&fd_e, &f.edot(s), 1e-8);
            }
        }
    }

    #[test]
    fn fs_velocity_values() {
        assert!((fam(1.0).fs_velocity(0.0) - 0.25).abs() < 1e-15);
        for &g in &[0.5, 2.0, 3.0] {
            assert!((fam(g).fs_velocity(0.0) - 1.0 / (4.0 * g * g)).abs() < 1e-14);
        }
        let f = fam(1.3);
        for &s in &[-2.0, 0.1, 5.0] {
            let (_, pm) = f.projectors(s);
            let (dp, _) = f.projector_rate(s);
            let direct = (pm * dp * dp * pm).trace().re;
            assert!((direct - f.fs_velocity(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_parsing() {
        assert_eq!(
            "const:0.5".parse::<GammaProfile>().unwrap(),
            GammaProfile::Constant { amplitude: 0.5 }
        );
        assert_eq!(
            "gauss:1.0:4.0".parse::<GammaProfile>().unwrap(),
            GammaProfile::GaussianBump { amplitude: 1.0, width: 4.0 }
        );
        assert_eq!(
            "logistic:0.5:2".parse::<GammaProfile>().unwrap(),
            GammaProfile::Logistic { amplitude: 0.5, width: 2.0 }
        );
        let err = "const:-1".parse::<GammaProfile>().unwrap_err();
        assert!(err.to_string().contains("gamma amplitude must be ≥ 0"), "{err}");
        assert!("cauchy:1".parse::<GammaProfile>().is_err());
        assert!("gauss:1".parse::<GammaProfile>().is_err());
        assert!("gauss:1:0".parse::<GammaProfile>().is_err());
        assert!("const:x".parse::<GammaProfile>().is_err());
    }

    #[test]
    fn profile_display_round_trips() {
        for text in ["const:0.25", "gauss:1:4", "logistic:0.5:2"] {
            let p: GammaProfile = text.parse().unwrap();
            assert_eq!(p.to_string().parse::<GammaProfile>().unwrap(), p);
        }
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let h = 1e-5;
        let profiles = [
            GammaProfile::constant(0.7).unwrap(),
            GammaProfile::gaussian_bump(1.0, 4.0).unwrap(),
            GammaProfile::logistic(0.5, 2.0).unwrap(),
        ];
        for p in profiles {
            for &s in &[-9.0, -2.0, 0.0, 1.5, 6.0] {
                let (v, d1, d2) = p.derivatives(s);
                assert!(v >= 0.0 && v <= p.sup());
                let fd1 = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
                let fd2 = (p.rate(s + h) - p.rate(s - h)) / (2.0 * h);
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
                assert!(rel(fd1, d1) < 1e-6, "{p} rate at {s}: {fd1} vs {d1}");
                assert!(rel(fd2, d2) < 1e-6, "{p} curvature at {s}: {fd2} vs {d2}");
            }
        }
    }

    #[test]
    fn logistic_is_stable_in_tails() {
        let p = GammaProfile::logistic(0.5, 0.01).unwrap();
        let (v, d1, d2) = p.derivatives(-1e3);
        assert!(v == 0.0 && d1 == 0.0 && d2 == 0.0);
        let (v, d1, _) = p.derivatives(1e3);
        assert_eq!(v, 0.5);
        assert_eq!(d1, 0.0);
    }
}
