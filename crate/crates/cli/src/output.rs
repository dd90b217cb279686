//! CSV and JSON serialization of sweep results.

use lzdeph::transition::TransitionRecord;
use serde::Serialize;

use crate::sweep::{GroupFit, SweepReport};

pub const CSV_HEADER: &str = "g,epsilon,gamma_spec,T,p_measured,p_coherent,incoherent_integral,p_predicted,residual,tail_bound,cptp_trace_defect,steps_accepted,wall_time_s";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordRow {
    pub g: f64,
    pub epsilon: f64,
    pub gamma_spec: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub p_measured: f64,
    pub p_coherent: f64,
    pub incoherent_integral: f64,
    pub p_predicted: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub cptp_trace_defect: f64,
    pub steps_accepted: usize,
    pub wall_time_s: f64,
}

impl From<&TransitionRecord> for RecordRow {
    fn from(r: &TransitionRecord) -> Self {
        RecordRow {
            g: r.g,
            epsilon: r.epsilon,
            gamma_spec: r.gamma_desc.clone(),
            horizon: r.horizon,
            p_measured: r.p_measured,
            p_coherent: r.p_coherent,
            incoherent_integral: r.incoherent_integral,
            p_predicted: r.p_predicted,
            residual: r.residual,
            tail_bound: r.tail_bound,
            cptp_trace_defect: r.cptp_trace_defect,
            steps_accepted: r.steps_accepted,
            wall_time_s: r.wall_time,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub g: f64,
    pub gamma_spec: String,
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_scaled_residual: f64,
}

impl From<&GroupFit> for FitRow {
    fn from(f: &GroupFit) -> Self {
        FitRow {
            g: f.g,
            gamma_spec: f.gamma_spec.clone(),
            epsilons: f.fit.epsilons.clone(),
            residuals: f.fit.residuals.clone(),
            slope: f.fit.slope,
            intercept: f.fit.intercept,
            r_squared: f.fit.r_squared,
            max_scaled_residual: f.fit.max_scaled_residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureRow {
    pub g: f64,
    pub epsilon: f64,
    pub gamma_spec: String,
    pub reason: String,
}

#[derive(Serialize)]
struct JsonReport {
    records: Vec<RecordRow>,
    fits: Vec<FitRow>,
    failures: Vec<FailureRow>,
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_line(r: &TransitionRecord) -> String {
    [
        sci(r.g),
        sci(r.epsilon),
        r.gamma_desc.clone(),
        sci(r.horizon),
        sci(r.p_measured),
        sci(r.p_coherent),
        sci(r.incoherent_integral),
        sci(r.p_predicted),
        sci(r.residual),
        sci(r.tail_bound),
        sci(r.cptp_trace_defect),
        r.steps_accepted.to_string(),
        sci(r.wall_time),
    ]
    .join(",")
}

pub fn to_csv(records: &[TransitionRecord]) -> String {
    let mut out = String::with_capacity(256 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &SweepReport) -> String {
    let doc = JsonReport {
        records: report.records.iter().map(RecordRow::from).collect(),
        fits: report.order_fits.iter().map(FitRow::from).collect(),
        failures: report
            .failures
            .iter()
            .map(|f| FailureRow { g: f.cell.g, epsilon: f.cell.epsilon, gamma_spec: f.cell.gamma.to_string(), reason: f.reason.clone() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report rows serialize");
    s.push('\n');
    s
}

/// Human-readable order-fit summary lines.
pub fn fit_summary(fits: &[GroupFit]) -> String {
    fits.iter()
        .map(|f| {
            format!(
                "fit g={} gamma={}: slope {:.4}, r² {:.4}, max|R|/ε² {:.4e} over {} points\n",
                f.g,
                f.gamma_spec,
                f.fit.slope,
                f.fit.r_squared,
                f.fit.max_scaled_residual,
                f.fit.epsilons.len()
            )
        })
        .collect()
}
