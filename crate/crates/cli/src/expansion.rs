//! Tables of the first- and second-order expansion terms over an `s` grid.

use lzdeph::adiabatic::{first_order_a, second_order_b, Direction, Sign};
use lzdeph::algebra::Operator2;
use lzdeph::model::{GammaProfile, LzFamily};

use crate::error::{CliError, Result};

pub const EXPANSION_HEADER: &str =
    "s,sign,e_s,a_trace_norm,a_00,a_01_re,a_01_im,b_trace_norm,b_00,b_01_re,b_01_im,a_norm_e3,b_norm_e3";

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionSpec {
    pub g: f64,
    pub gamma: GammaProfile,
    pub s_prime: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionRow {
    pub s: f64,
    pub sign: Sign,
    pub gap_energy: f64,
    pub a: Operator2,
    pub b: Operator2,
}

pub fn expansion_table(spec: &ExpansionSpec) -> Result<Vec<ExpansionRow>> {
    if spec.points < 2 {
        return Err(CliError::Config(format!("points: need at least 2, got {}", spec.points)));
    }
    if !(spec.s_prime <= spec.s_min && spec.s_min < spec.s_max) {
        return Err(CliError::Config(format!(
            "need s_prime ≤ s_min < s_max, got s_prime {}, s_min {}, s_max {}",
            spec.s_prime, spec.s_min, spec.s_max
        )));
    }
    let fam = LzFamily::new(spec.g)?;
    let step = (spec.s_max - spec.s_min) / (spec.points - 1) as f64;
    let mut rows = Vec::with_capacity(2 * spec.points);
    for k in 0..spec.points {
        let s = if k + 1 == spec.points { spec.s_max } else { spec.s_min + step * k as f64 };
        for sign in [Sign::Plus, Sign::Minus] {
            rows.push(ExpansionRow {
                s,
                sign,
                gap_energy: fam.gap_energy(s),
                a: first_order_a(&fam, &spec.gamma, s, spec.s_prime, sign)?,
                b: second_order_b(&fam, &spec.gamma, s, spec.s_prime, sign, Direction::Forward)?,
            });
        }
    }
    Ok(rows)
}

pub fn expansion_csv(rows: &[ExpansionRow]) -> String {
    let mut out = String::from(EXPANSION_HEADER);
    out.push('\n');
    for r in rows {
        let e3 = r.gap_energy.powi(3);
        let cells = [
            format!("{:.16e}", r.s),
            match r.sign {
                Sign::Plus => "+".to_string(),
                Sign::Minus => "-".to_string(),
            },
            format!("{:.16e}", r.gap_energy),
            format!("{:.16e}", r.a.trace_norm()),
            format!("{:.16e}", r.a.get(0, 0).re),
            format!("{:.16e}", r.a.get(0, 1).re),
            format!("{:.16e}", r.a.get(0, 1).im),
            format!("{:.16e}", r.b.trace_norm()),
            format!("{:.16e}", r.b.get(0, 0).re),
            format!("{:.16e}", r.b.get(0, 1).re),
            format!("{:.16e}", r.b.get(0, 1).im),
            format!("{:.16e}", r.a.trace_norm() * e3),
            format!("{:.16e}", r.b.trace_norm() * e3),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape_and_first_order_norm() {
        let spec = ExpansionSpec {
            g: 1.0,
            gamma: GammaProfile::constant(0.0).unwrap(),
            s_prime: -10.0,
            s_min: -5.0,
            s_max: 5.0,
            points: 11,
        };
        let rows = expansion_table(&spec).unwrap();
        assert_eq!(rows.len(), 22);
        assert_eq!(rows.last().unwrap().s, 5.0);
        for r in &rows {
            // γ ≡ 0: ‖a‖₁ = g/(8e³)
            let expected = 1.0 / (8.0 * r.gap_energy.powi(3));
            assert!((r.a.trace_norm() - expected).abs() < 1e-12);
        }
        let csv = expansion_csv(&rows);
        assert_eq!(csv.lines().count(), 23);
    }

    #[test]
    fn rejects_bad_grid() {
        let mut spec = ExpansionSpec {
            g: 1.0,
            gamma: GammaProfile::constant(0.0).unwrap(),
            s_prime: 0.0,
            s_min: -5.0,
            s_max: 5.0,
            points: 11,
        };
        assert!(expansion_table(&spec).is_err());
        spec.s_prime = -6.0;
        spec.points = 1;
        assert!(expansion_table(&spec).is_err());
    }
}
