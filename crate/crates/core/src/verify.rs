//! Built-in verification suites. Each check records the measured quantity,
//! its tolerance and the outcome, so reports can be printed or serialized by
//! callers.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adiabatic::{
    b_bound_scan, b_rate_bound_check, definitional_terms, first_order_a, first_order_a_hat,
    parallel_transport, second_order_b, Direction, Sign,
};
use crate::algebra::{random, Operator2, SuperOp};
use crate::error::{Error, Result};
use crate::lindblad::{
    apply_dephasing_part, apply_lindbladian, coherence_eigenvalue, dephasing_lindbladian,
    dephasing_part, inverse_on_range, kernel_projection, kernel_projection_rate, minimal_form,
    GaugeParams, GeneralLindblad,
};
use crate::model::{GammaProfile, LzFamily};
use crate::propagate::{cptp_report, evolve_dual, evolve_state, evolve_superop, IntegratorConfig};
use crate::transition::{duhamel_split, incoherent_integral, measured_p, tail_bound};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Algebra,
    Model,
    Lindblad,
    Adiabatic,
    Propagate,
    Transition,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["algebra", "model", "lindblad", "adiabatic", "propagate", "transition", "all"];

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Algebra,
                Suite::Model,
                Suite::Lindblad,
                Suite::Adiabatic,
                Suite::Propagate,
                Suite::Transition,
            ],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Model => "model",
            Suite::Lindblad => "lindblad",
            Suite::Adiabatic => "adiabatic",
            Suite::Propagate => "propagate",
            Suite::Transition => "transition",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "algebra" => Suite::Algebra,
            "model" => Suite::Model,
            "lindblad" => Suite::Lindblad,
            "adiabatic" => Suite::Adiabatic,
            "propagate" => Suite::Propagate,
            "transition" => Suite::Transition,
            "all" => Suite::All,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown suite {other:?}; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "[{}] {:<10} {:<58} {:.3e} {op} {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Recorder {
    suite: Suite,
    checks: Vec<Check>,
}

impl Recorder {
    fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, tolerance, Bound::AtMost, value <= tolerance);
    }

    fn at_least(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, tolerance, Bound::AtLeast, value >= tolerance);
    }

    /// A quantity only required to be finite.
    fn finite(&mut self, name: &str, value: f64) {
        self.push(name, value, f64::INFINITY, Bound::AtMost, value.is_finite());
    }

    /// Records a computation that failed outright.
    fn error(&mut self, name: &str, err: &Error) {
        log::error!("{name}: {err}");
        self.push(name, f64::NAN, f64::NAN, Bound::AtMost, false);
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64, bound: Bound, pass: bool) {
        self.checks.push(Check { suite: self.suite, name: name.to_string(), value, tolerance, bound, pass });
    }

    fn run(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(name, &e);
        }
    }
}

/// Runs a suite and returns every check it performed.
pub fn verify(suite: Suite) -> Report {
    let mut checks = Vec::new();
    for s in suite.members() {
        let mut rec = Recorder { suite: s, checks: Vec::new() };
        match s {
            Suite::Algebra => algebra_suite(&mut rec),
            Suite::Model => model_suite(&mut rec),
            Suite::Lindblad => lindblad_suite(&mut rec),
            Suite::Adiabatic => adiabatic_suite(&mut rec),
            Suite::Propagate => propagate_suite(&mut rec),
            Suite::Transition => transition_suite(&mut rec),
            Suite::All => unreachable!(),
        }
        checks.extend(rec.checks);
    }
    Report { checks }
}

fn lz(g: f64) -> LzFamily {
    LzFamily::new(g).expect("positive gap")
}

fn profiles() -> Vec<GammaProfile> {
    vec![
        GammaProfile::Constant { amplitude: 0.0 },
        GammaProfile::Constant { amplitude: 0.5 },
        GammaProfile::GaussianBump { amplitude: 1.0, width: 4.0 },
        GammaProfile::Logistic { amplitude: 0.5, width: 2.0 },
    ]
}

fn algebra_suite(r: &mut Recorder) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let f = lz(1.0);

    let mut identity_dev: f64 = 0.0;
    let mut lower_slack: f64 = f64::INFINITY;
    for k in 0..400 {
        let s = -20.0 + 0.1 * k as f64;
        let e = f.coherence_op(s);
        let (bp, bm) = (random::complex(&mut rng), random::complex(&mut rng));
        let off = e.scale(bp) + e.adjoint().scale(bm);
        identity_dev = identity_dev.max((off.trace_norm() - (bp.norm() + bm.norm())).abs());
        let (pp, pm) = f.projectors(s);
        let full = off + pp.scale(random::complex(&mut rng)) + pm.scale(random::complex(&mut rng));
        lower_slack = lower_slack.min(full.trace_norm() - (bp.norm() + bm.norm()));
    }
    r.at_most("trace norm of bE + b'E* equals |b| + |b'|", identity_dev, 1e-12);
    r.at_least("trace norm dominates |b| + |b'|", lower_slack, -1e-12);

    let mut svd_dev: f64 = 0.0;
    for _ in 0..200 {
        let m = random::operator(&mut rng);
        let (s1, s2) = m.singular_values();
        let sv = m.0.svd(false, false).singular_values;
        let (r1, r2) = (sv[0].max(sv[1]), sv[0].min(sv[1]));
        svd_dev = svd_dev.max((s1 - r1).abs()).max((s2 - r2).abs());
    }
    r.at_most("closed-form singular values vs SVD", svd_dev, 1e-12);

    let mut dual_dev: f64 = 0.0;
    for _ in 0..100 {
        let s = SuperOp(Matrix4::from_fn(|_, _| random::complex(&mut rng)));
        let (x, rho) = (random::operator(&mut rng), random::operator(&mut rng));
        dual_dev = dual_dev.max((s.dual().apply(&x).pairing(&rho) - x.pairing(&s.apply(&rho))).norm());
    }
    r.at_most("dual pairing tr(S*(X)ρ) = tr(X S(ρ))", dual_dev, 1e-12);

    let eig = SuperOp::identity().choi_eigenvalues();
    let choi_dev = (eig[3] - 2.0).abs().max(eig[..3].iter().map(|v| v.abs()).fold(0.0, f64::max));
    r.at_most("Choi spectrum of the identity channel {2, 0, 0, 0}", choi_dev, 1e-12);
}

fn model_suite(r: &mut Recorder) {
    let h = 1e-5;
    let mut pdot_dev: f64 = 0.0;
    let mut edot_dev: f64 = 0.0;
    let mut fs_dev: f64 = 0.0;
    let mut proj_dev: f64 = 0.0;
    for &g in &[0.5, 1.0, 2.0] {
        let f = lz(g);
        for k in 0..41 {
            let s = -10.0 + 0.5 * k as f64;
            let (up, um) = f.projectors(s + h);
            let (dp, dm) = f.projectors(s - h);
            let (rp, rm) = f.projector_rate(s);
            pdot_dev = pdot_dev
                .max(((up - dp) * (0.5 / h) - rp).max_abs())
                .max(((um - dm) * (0.5 / h) - rm).max_abs());
            let fd_e = (f.coherence_op(s + h) - f.coherence_op(s - h)) * (0.5 / h);
            edot_dev = edot_dev.max((fd_e - f.edot(s)).max_abs());
            let (pp, pm) = f.projectors(s);
            fs_dev = fs_dev.max(((pm * rp * rp * pm).trace().re - f.fs_velocity(s)).abs());
            proj_dev = proj_dev
                .max((pp * pp - pp).max_abs())
                .max((pp + pm - Operator2::identity()).max_abs())
                .max((f.hamiltonian(s) * pp - pp * f.gap_energy(s)).max_abs());
        }
    }
    r.at_most("dP±/ds closed form vs central difference", pdot_dev, 1e-7);
    r.at_most("dE/ds closed form vs central difference", edot_dev, 1e-7);
    r.at_most("tr(P⁻(Ṗ⁺)²P⁻) = g²/(64e⁴)", fs_dev, 1e-12);
    r.at_most("spectral projections of H_s", proj_dev, 1e-12);
}

fn lindblad_suite(r: &mut Recorder) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let f = lz(1.0);

    let mut ratio: f64 = 0.0;
    let mut kernel_dev: f64 = 0.0;
    let mut eig_dev: f64 = 0.0;
    let mut cross_dev: f64 = 0.0;
    for k in 0..81 {
        let s = -20.0 + 0.5 * k as f64;
        let e = f.gap_energy(s);
        for _ in 0..25 {
            let rho = random::operator(&mut rng);
            ratio = ratio.max(apply_dephasing_part(&f, s, &rho).trace_norm() / (4.0 * e * rho.trace_norm()));
        }
        for gm in profiles() {
            let gs = gm.value(s);
            let (pp, pm) = f.projectors(s);
            for x in [pp, pm, Operator2::identity()] {
                kernel_dev = kernel_dev.max(apply_lindbladian(&f, s, gs, &x).max_abs());
            }
            let eop = f.coherence_op(s);
            let lam = coherence_eigenvalue(&f, s, gs);
            eig_dev = eig_dev
                .max((apply_lindbladian(&f, s, gs, &eop) - eop.scale(lam)).max_abs())
                .max((apply_lindbladian(&f, s, gs, &eop.adjoint()) - eop.adjoint().scale(lam.conj())).max_abs());
            let jump = f.sqrt_hamiltonian(s) * gs.sqrt();
            let general = GeneralLindblad::new(f.hamiltonian(s), vec![jump]).map(|l| l.superop());
            match general {
                Ok(gl) => cross_dev = cross_dev.max((gl - dephasing_lindbladian(&f, s, &gm)).max_abs()),
                Err(e) => r.error("general vs dephasing construction", &e),
            }
        }
    }
    r.at_most("‖𝓓_s ρ‖₁ / (4e_s ‖ρ‖₁) sampled", ratio, 1.0 + 1e-12);
    r.at_most("𝓛_s annihilates P⁺, P⁻ and 1", kernel_dev, 1e-12);
    r.at_most("𝓛_s E = 2(-i-γ)e E and its adjoint", eig_dev, 1e-12);
    r.at_most("self-adjoint jump √γ√H reproduces (γ/2)𝓓", cross_dev, 1e-12);

    let d_dual = {
        let d = dephasing_part(&f, 0.7);
        (d.dual() - d).max_abs()
    };
    r.at_most("𝓓_s is self-dual", d_dual, 1e-14);

    r.run("minimal form reproduces the dephasing Lindbladian", |r| {
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let s = -10.0 + 0.1 * k as f64;
            let (pp, pm) = f.projectors(s);
            let (ep, em) = (3.0 * random::complex(&mut rng).re, 3.0 * random::complex(&mut rng).re);
            let fvals: Vec<_> = (0..3).map(|_| (random::complex(&mut rng), random::complex(&mut rng))).collect();
            let m = minimal_form(ep, em, &fvals)?;
            let h = pp * ep + pm * em;
            let jumps = fvals.iter().map(|&(a, b)| pp.scale(a) + pm.scale(b)).collect();
            let general = GeneralLindblad::new((h + h.adjoint()) * 0.5, jumps)?.superop();
            worst = worst.max((general - m.superop(&pp, &pm)).max_abs());
        }
        r.at_most("minimal form reproduces the dephasing Lindbladian", worst, 1e-12);
        Ok(())
    });

    r.run("gauge invariance of the Lindbladian", |r| {
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let jumps: Vec<_> = (0..3).map(|_| random::operator(&mut rng)).collect();
            let l = GeneralLindblad::new(random::hermitian(&mut rng), jumps)?;
            let gp = GaugeParams {
                c: (0..3).map(|_| random::complex(&mut rng) * 2.0).collect(),
                e: 3.0 * random::complex(&mut rng).re,
            };
            worst = worst.max((l.gauge_transform(&gp)?.superop() - l.superop()).max_abs());
        }
        r.at_most("gauge invariance of the Lindbladian", worst, 1e-10);
        Ok(())
    });

    let h = 1e-5;
    let mut rate_dev: f64 = 0.0;
    for k in 0..41 {
        let s = -10.0 + 0.5 * k as f64;
        let fd = (kernel_projection(&f, s + h) - kernel_projection(&f, s - h)) * (0.5 / h);
        rate_dev = rate_dev.max((fd - kernel_projection_rate(&f, s)).max_abs());
    }
    r.at_most("d𝓟/ds closed form vs central difference", rate_dev, 1e-7);
}

fn adiabatic_suite(r: &mut Recorder) {
    let f = lz(1.0);
    let tol = 1e-10;

    r.run("parallel transport", |r| {
        let tr = parallel_transport(&f, -10.0, 10.0, tol)?;
        r.at_most("transport intertwines 𝓟_{s'} and 𝓟_s", tr.intertwining_defect, 1e-8);
        let (pp0, pm0) = f.projectors(-10.0);
        let (pp1, pm1) = f.projectors(10.0);
        let kernel = (tr.transport.apply(&pm0) - pm1)
            .trace_norm()
            .max((tr.transport.apply(&pp0) - pp1).trace_norm());
        r.at_most("transport carries P±_{s'} to P±_s", kernel, 1e-8);
        let mut iso: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        for _ in 0..50 {
            let rho = pp0.scale(random::complex(&mut rng)) + pm0.scale(random::complex(&mut rng));
            iso = iso.max((tr.transport.apply(&rho).trace_norm() - rho.trace_norm()).abs());
        }
        r.at_most("transport is isometric on the kernel", iso, 10.0 * tol);
        Ok(())
    });

    r.run("𝓟𝓛⁻¹Ṗ = 0", |r| {
        let mut worst: f64 = 0.0;
        for gm in profiles() {
            for k in 0..41 {
                let s = -10.0 + 0.5 * k as f64;
                let (rp, rm) = f.projector_rate(s);
                for x in [rp, rm] {
                    let y = inverse_on_range(&f, s, &gm, &x)?;
                    worst = worst.max(kernel_projection(&f, s).apply(&y).max_abs());
                }
            }
        }
        r.at_most("𝓟𝓛⁻¹Ṗ = 0", worst, 1e-14);
        Ok(())
    });

    r.run("closed forms vs definitions", |r| {
        let mut a_dev: f64 = 0.0;
        let mut b_dev: f64 = 0.0;
        let mut ah_dev: f64 = 0.0;
        let mut bt_dev: f64 = 0.0;
        for gm in profiles() {
            for &(lo, hi) in &[(-6.0, 1.0), (-3.0, 0.0), (-1.0, 4.0)] {
                for sign in [Sign::Plus, Sign::Minus] {
                    let fwd = definitional_terms(&f, &gm, hi, lo, sign, Direction::Forward)?;
                    a_dev = a_dev.max((first_order_a(&f, &gm, hi, lo, sign)? - fwd.a).max_abs());
                    b_dev = b_dev.max((second_order_b(&f, &gm, hi, lo, sign, Direction::Forward)? - fwd.b).max_abs());
                    let dual = definitional_terms(&f, &gm, lo, hi, sign, Direction::Dual)?;
                    ah_dev = ah_dev.max((first_order_a_hat(&f, &gm, lo, hi, sign)? - dual.a).max_abs());
                    bt_dev = bt_dev.max((second_order_b(&f, &gm, lo, hi, sign, Direction::Dual)? - dual.b).max_abs());
                }
            }
        }
        r.at_most("a± closed form vs definition", a_dev, 1e-8);
        r.at_most("b± closed form vs definition", b_dev, 1e-8);
        r.at_most("â± closed form vs dual definition", ah_dev, 1e-8);
        r.at_most("b̃± closed form vs dual definition", bt_dev, 1e-8);
        Ok(())
    });

    r.run("first-order norms", |r| {
        let zero = GammaProfile::Constant { amplitude: 0.0 };
        let mut a_dev: f64 = 0.0;
        let mut at_dev: f64 = 0.0;
        for k in 0..41 {
            let s = -10.0 + 0.5 * k as f64;
            let e = f.gap_energy(s);
            let a = first_order_a(&f, &zero, s, s - 5.0, Sign::Minus)?;
            a_dev = a_dev.max((a.trace_norm() - f.g() / (8.0 * e.powi(3))).abs());
            for &gc in &[0.25, 1.0, 2.0] {
                let gm = GammaProfile::Constant { amplitude: gc };
                // anchor = τ leaves the coherent part only
                let at = first_order_a_hat(&f, &gm, s, s, Sign::Plus)?;
                at_dev = at_dev.max((at.trace_norm() - f.g() / (8.0 * (1.0 + gc * gc).sqrt() * e.powi(3))).abs());
            }
        }
        r.at_most("‖a⁻‖₁ = g/(8e³) without dephasing", a_dev, 1e-12);
        r.at_most("‖ã⁺‖₁ = g/(8√(1+γ²)e³)", at_dev, 1e-12);
        Ok(())
    });

    r.run("incoherent density from first-order terms", |r| {
        // γ tr(ã 𝓓 a₀)/2 is the integrand of the dephasing correction
        let zero = GammaProfile::Constant { amplitude: 0.0 };
        let mut worst: f64 = 0.0;
        for &gc in &[0.25, 0.5, 1.0, 2.0] {
            let gm = GammaProfile::Constant { amplitude: gc };
            for k in 0..21 {
                let tau = -10.0 + k as f64;
                let e = f.gap_energy(tau);
                let at = first_order_a_hat(&f, &gm, tau, tau, Sign::Plus)?;
                let a0 = first_order_a(&f, &zero, tau, tau - 3.0, Sign::Minus)?;
                let lhs = 0.5 * gc * at.pairing(&apply_dephasing_part(&f, tau, &a0)).re;
                let rhs = gc * f.g().powi(2) / (64.0 * (1.0 + gc * gc) * e.powi(5));
                worst = worst.max((lhs - rhs).abs() / rhs);
            }
        }
        r.at_most("γ tr(ã𝓓a₀)/2 = g²γ/(64(1+γ²)e⁵) (relative)", worst, 1e-12);
        Ok(())
    });

    r.run("second-order bounds", |r| {
        let grid: Vec<f64> = (0..=200).map(|k| -50.0 + 0.5 * k as f64).collect();
        for gm in profiles() {
            let b = b_bound_scan(&f, &gm, -50.0, &grid, Sign::Minus)?;
            r.finite(&format!("max ‖b‖₁e³ over [-50, 50], γ = {gm}"), b.max_scaled);
            let bd = b_rate_bound_check(&f, &gm, -50.0, &grid, Sign::Minus)?;
            r.finite(&format!("max ‖ḃ‖₁e³ over [-50, 50], γ = {gm}"), bd.max_scaled);
        }
        Ok(())
    });

    r.run("expansion residual order", |r| {
        // ‖𝓛(P + εa) - ε d/ds(P + εa)‖₁ against ε
        let gm = GammaProfile::GaussianBump { amplitude: 1.0, width: 4.0 };
        let (s, sp, h) = (0.8, -5.0, 1e-4);
        let mut pts = Vec::new();
        for &eps in &[0.4, 0.2, 0.1, 0.05] {
            let state = |t: f64| -> Result<Operator2> { Ok(f.projectors(t).1 + first_order_a(&f, &gm, t, sp, Sign::Minus)? * eps) };
            let deriv = (state(s + h)? - state(s - h)?) * (0.5 / h);
            let res = apply_lindbladian(&f, s, gm.value(s), &state(s)?) - deriv * eps;
            pts.push((eps, res.trace_norm()));
        }
        let eps: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let res: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let fit = crate::transition::fit_log_log(&eps, &res)?;
        r.at_most("residual order |slope - 2|", (fit.slope - 2.0).abs(), 0.05);
        Ok(())
    });
}

fn propagate_suite(r: &mut Recorder) {
    let f = lz(1.0);
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);

    let mut trace_defect: f64 = 0.0;
    let mut choi_min: f64 = f64::INFINITY;
    let mut contract: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for gm in profiles() {
        for &eps in &[0.5, 0.2] {
            match evolve_superop(&f, &gm, eps, -10.0, 10.0, &cfg) {
                Ok(u) => {
                    let rep = cptp_report(&u.value);
                    trace_defect = trace_defect.max(rep.trace_defect);
                    choi_min = choi_min.min(rep.choi_min_eig);
                    herm = herm.max(u.value.hermiticity_preservation_defect());
                    for _ in 0..20 {
                        let rho = random::hermitian(&mut rng);
                        contract = contract.max(u.value.apply(&rho).trace_norm() / rho.trace_norm() - 1.0);
                    }
                }
                Err(e) => r.error("superpropagator", &e),
            }
        }
    }
    r.at_most("max |𝓤*(1) - 1| over propagators", trace_defect, 1e-9);
    r.at_least("min Choi eigenvalue over propagators", choi_min, -1e-8);
    r.at_most("Hermiticity preservation of 𝓤", herm, 1e-10);
    r.at_most("‖𝓤ρ‖₁/‖ρ‖₁ - 1 on Hermitian ρ", contract, 1e-9);

    r.run("state evolution", |r| {
        let gm = GammaProfile::GaussianBump { amplitude: 1.0, width: 4.0 };
        let rho0 = f.projectors(-10.0).1;
        let out = evolve_state(&f, &gm, 0.2, &rho0, -10.0, 10.0, &cfg)?;
        r.at_most("trace preserved", (out.value.trace() - C64::new(1.0, 0.0)).norm(), 1e-12);
        r.at_most("Hermiticity preserved", out.value.hermiticity_defect(), 1e-10);
        r.at_least("positivity", out.value.hermitian_eigenvalues()[0], -1e-8);

        let fine = IntegratorConfig { rtol: 0.5 * cfg.rtol, ..cfg };
        let out2 = evolve_state(&f, &gm, 0.2, &rho0, -10.0, 10.0, &fine)?;
        let budget = cfg.rtol * out.steps_accepted as f64;
        r.at_most("halving rtol moves the state less than rtol·steps", (out2.value - out.value).max_abs() / budget, 1.0);

        let zero = GammaProfile::Constant { amplitude: 0.0 };
        let pure = evolve_state(&f, &zero, 0.3, &rho0, -10.0, 10.0, &cfg)?;
        r.at_most("purity conserved without dephasing", ((pure.value * pure.value).trace().re - 1.0).abs(), 1e-9);
        Ok(())
    });

    r.run("composition and duality", |r| {
        let gm = GammaProfile::Logistic { amplitude: 0.5, width: 2.0 };
        let whole = evolve_superop(&f, &gm, 0.3, -6.0, 6.0, &cfg)?.value;
        let a = evolve_superop(&f, &gm, 0.3, -6.0, 0.7, &cfg)?.value;
        let b = evolve_superop(&f, &gm, 0.3, 0.7, 6.0, &cfg)?.value;
        r.at_most("𝓤(s₁,m)𝓤(m,s₀) = 𝓤(s₁,s₀)", (b * a - whole).max_abs(), 10.0 * cfg.rtol);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let x = random::hermitian(&mut rng);
            let rho = random::density(&mut rng);
            let dx = evolve_dual(&f, &gm, 0.3, &x, 6.0, -6.0, &cfg)?.value;
            worst = worst.max((dx.pairing(&rho) - x.pairing(&whole.apply(&rho))).norm());
        }
        r.at_most("tr(𝓤*(A)ρ) = tr(A 𝓤(ρ))", worst, 10.0 * cfg.rtol);
        Ok(())
    });
}

fn transition_suite(r: &mut Recorder) {
    let f = lz(1.0);
    let cfg = IntegratorConfig::default();

    r.run("Duhamel identity", |r| {
        let gm = GammaProfile::Constant { amplitude: 0.5 };
        let split = duhamel_split(&f, &gm, 0.3, 20.0, &cfg, 1e-12)?;
        let rec = measured_p(&f, &gm, 0.3, 20.0, &cfg)?;
        r.at_most("Duhamel split sums to p (g=1, ε=0.3, γ=0.5, T=20)", (split.total() - rec.p_measured).abs(), 1e-6);
        Ok(())
    });

    r.run("incoherent integral", |r| {
        let mut worst: f64 = 0.0;
        for &gc in &[0.25, 0.5, 1.0, 2.0] {
            let gm = GammaProfile::Constant { amplitude: gc };
            let v = incoherent_integral(&f, &gm, f64::INFINITY, 1e-12)?;
            worst = worst.max((v - 2.0 * gc / (3.0 * (1.0 + gc * gc))).abs());
        }
        r.at_most("incoherent integral = 2γ/(3g²(1+γ²))", worst, 1e-10);
        let gm = GammaProfile::Constant { amplitude: 1.0 };
        let tail = incoherent_integral(&f, &gm, f64::INFINITY, 1e-13)? - incoherent_integral(&f, &gm, 25.0, 1e-13)?;
        r.at_most("truncation at T = 25 within tail bound", tail, tail_bound(1.0, 1.0, 25.0));
        Ok(())
    });

    r.run("coherence suppression", |r| {
        let mut prev = f64::INFINITY;
        let mut worst_increase: f64 = 0.0;
        let mut p_range: f64 = 0.0;
        for &gc in &[0.0, 0.5, 1.0, 2.0] {
            let gm = GammaProfile::Constant { amplitude: gc };
            let rec = measured_p(&f, &gm, 0.3, 15.0, &cfg)?;
            worst_increase = worst_increase.max(rec.final_coherence - prev);
            prev = rec.final_coherence;
            p_range = p_range.max(rec.p_measured - 1.0).max(-rec.p_measured);
        }
        r.at_most("final coherence non-increasing in γ", worst_increase, 1e-12);
        r.at_most("p outside [0, 1]", p_range, 1e-8);
        Ok(())
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().name(), name);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn lindblad_suite_contains_dephasing_bound() {
        let rep = verify(Suite::Lindblad);
        assert!(rep.checks.iter().any(|c| c.name.contains("4e_s")));
        assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Algebra, Suite::Model] {
            let rep = verify(s);
            assert!(!rep.checks.is_empty());
            assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
        }
    }
}
