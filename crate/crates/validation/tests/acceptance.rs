//! End-to-end acceptance run. Each criterion prints a single PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use lzdeph::adiabatic::{expansion_initial_state, remainder_extract, Sign};
use lzdeph::model::{GammaProfile, LzFamily};
use lzdeph::propagate::{evolve_operator, IntegratorConfig};
use lzdeph::transition::{coherent_lz, duhamel_split, incoherent_integral, measured_p, order_fit, DEFAULT_QTOL};
use lzdeph::verify::{verify, Suite};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Result<Outcome, lzdeph::error::Error>;

fn cfg() -> IntegratorConfig {
    IntegratorConfig::with_tolerances(1e-10, 1e-12)
}

fn coherent_reproduction() -> Result<Outcome, lzdeph::error::Error> {
    let fam = LzFamily::new(1.0)?;
    let gamma = GammaProfile::constant(0.0)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for eps in [1.0, 0.5, 0.25] {
        let rec = measured_p(&fam, &gamma, eps, 30.0, &cfg())?;
        let err = (rec.p_measured - coherent_lz(1.0, eps)).abs();
        worst = worst.max(err);
        parts.push(format!("ε={eps}: |Δ|={err:.2e}"));
    }
    Ok(Outcome { pass: worst <= 1e-3, detail: format!("{} (tol 1e-3)", parts.join(", ")) })
}

fn residual_order() -> Result<Outcome, lzdeph::error::Error> {
    let fam = LzFamily::new(1.0)?;
    let gamma = GammaProfile::constant(0.5)?;
    let closed = 2.0 * 0.5 / (3.0 * 1.25);
    let integral = incoherent_integral(&fam, &gamma, f64::INFINITY, DEFAULT_QTOL)?;
    let integral_err = (integral - closed).abs();
    let records = [0.4, 0.3, 0.2, 0.15, 0.1]
        .iter()
        .map(|&eps| measured_p(&fam, &gamma, eps, 25.0, &cfg()))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = order_fit(&records)?;
    let residuals: Vec<String> = fit.residuals.iter().map(|r| format!("{r:.3e}")).collect();
    let pass = (1.7..=2.5).contains(&fit.slope) && fit.r_squared >= 0.95 && integral_err <= 1e-10 && fit.epsilons.len() == 5;
    Ok(Outcome {
        pass,
        detail: format!(
            "slope {:.4} (need [1.7, 2.5]), r² {:.4} (need ≥ 0.95), points {}, C≈max|R|/ε² {:.4}, residuals [{}], |∫ − closed form| {:.2e} (tol 1e-10)",
            fit.slope,
            fit.r_squared,
            fit.epsilons.len(),
            fit.max_scaled_residual,
            residuals.join(", "),
            integral_err
        ),
    })
}

fn gamma_scaling() -> Result<Outcome, lzdeph::error::Error> {
    let fam = LzFamily::new(1.0)?;
    let eps = 0.2;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for gc in [0.25, 0.5, 1.0, 2.0] {
        let rec = measured_p(&fam, &GammaProfile::constant(gc)?, eps, 25.0, &cfg())?;
        let q = (rec.p_measured - coherent_lz(1.0, eps)) / eps;
        let expected = 2.0 * gc / (3.0 * (1.0 + gc * gc));
        let rel = ((q - expected) / expected).abs();
        worst = worst.max(rel);
        parts.push(format!("γ={gc}: {q:.4} vs {expected:.4} ({:.1}%)", 100.0 * rel));
    }
    Ok(Outcome { pass: worst <= 0.15, detail: format!("{} (tol 15%)", parts.join(", ")) })
}

fn duhamel_identity() -> Result<Outcome, lzdeph::error::Error> {
    let fam = LzFamily::new(1.0)?;
    let gamma = GammaProfile::constant(0.5)?;
    let split = duhamel_split(&fam, &gamma, 0.3, 20.0, &cfg(), DEFAULT_QTOL)?;
    let rec = measured_p(&fam, &gamma, 0.3, 20.0, &cfg())?;
    let gap = (split.total() - rec.p_measured).abs();
    Ok(Outcome {
        pass: gap <= 1e-6,
        detail: format!(
            "coherent {:.6} + incoherent {:.6} vs measured {:.6}: |Δ|={gap:.2e} (tol 1e-6)",
            split.coherent_part, split.incoherent_part, rec.p_measured
        ),
    })
}

fn property_suites() -> Result<Outcome, lzdeph::error::Error> {
    let report = verify(Suite::All);
    let failed: Vec<String> = report.failures().map(|c| c.to_string()).collect();
    let detail = if failed.is_empty() {
        format!("{} checks", report.checks.len())
    } else {
        format!("{} of {} checks failed: {}", failed.len(), report.checks.len(), failed.join("; "))
    };
    Ok(Outcome { pass: report.passed(), detail })
}

fn remainder_uniformity() -> Result<Outcome, lzdeph::error::Error> {
    let fam = LzFamily::new(1.0)?;
    let gamma = GammaProfile::gaussian_bump(1.0, 4.0)?;
    let s_prime = -20.0;
    let grid: Vec<f64> = (1..=80).map(|k| s_prime + 0.5 * k as f64).collect();
    let mut maxima = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let mut rho = expansion_initial_state(&fam, &gamma, eps, s_prime, Sign::Minus)?;
        let mut s = s_prime;
        let mut sup: f64 = 0.0;
        for &s1 in &grid {
            rho = evolve_operator(&fam, &gamma, eps, &rho, s, s1, &cfg())?.value;
            s = s1;
            let r = remainder_extract(&fam, &gamma, eps, s_prime, s1, Sign::Minus, &rho)?;
            sup = sup.max(r.trace_norm());
        }
        maxima.push((eps, sup));
    }
    let hi = maxima.iter().map(|m| m.1).fold(0.0, f64::max);
    let lo = maxima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let ratio = hi / lo;
    let parts: Vec<String> = maxima.iter().map(|(e, m)| format!("ε={e}: sup‖r‖₁={m:.4}")).collect();
    Ok(Outcome {
        pass: hi.is_finite() && lo > 0.0 && ratio <= 3.0,
        detail: format!("{}, ratio {ratio:.3} (tol 3)", parts.join(", ")),
    })
}

fn scale_invariance() -> Result<Outcome, lzdeph::error::Error> {
    let gamma = GammaProfile::constant(0.5)?;
    let a = measured_p(&LzFamily::new(1.0)?, &gamma, 0.5, 30.0, &cfg())?.p_measured;
    let b = measured_p(&LzFamily::new(2.0)?, &gamma, 2.0, 15.0, &cfg())?.p_measured;
    let gap = (a - b).abs();
    Ok(Outcome { pass: gap <= 5e-3, detail: format!("{a:.8} vs {b:.8}: |Δ|={gap:.2e} (tol 5e-3)") })
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("coherent Landau-Zener reproduction", coherent_reproduction),
        ("residual order of the generalized formula", residual_order),
        ("γ-scaling of the incoherent term", gamma_scaling),
        ("Duhamel identity", duhamel_identity),
        ("property suites", property_suites),
        ("remainder uniformity", remainder_uniformity),
        ("scale invariance", scale_invariance),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {} ({name}): {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
