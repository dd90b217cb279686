//! Concurrent evaluation of a `(g, γ, ε)` grid.

use lzdeph::model::{GammaProfile, LzFamily};
use lzdeph::transition::{measured_p_with_qtol, order_fit, OrderFit, TransitionRecord};
use rayon::prelude::*;

use crate::config::{Parallelism, SweepConfig};
use crate::error::{CliError, Result};

/// One grid point, in grid order `(g, γ, ε)` with ε varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub index: (usize, usize, usize),
    pub g: f64,
    pub gamma: GammaProfile,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub cell: Cell,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupFit {
    pub g: f64,
    pub gamma_spec: String,
    pub fit: OrderFit,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub records: Vec<TransitionRecord>,
    pub order_fits: Vec<GroupFit>,
    pub failures: Vec<CellFailure>,
}

impl SweepReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn grid(cfg: &SweepConfig) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(cfg.grid_size());
    for (i, &g) in cfg.g_values.iter().enumerate() {
        for (j, &gamma) in cfg.gamma_specs.iter().enumerate() {
            for (k, &epsilon) in cfg.epsilon_values.iter().enumerate() {
                cells.push(Cell { index: (i, j, k), g, gamma, epsilon });
            }
        }
    }
    cells
}

pub fn run_cell(cell: &Cell, cfg: &SweepConfig) -> std::result::Result<TransitionRecord, String> {
    let fam = LzFamily::new(cell.g).map_err(|e| e.to_string())?;
    measured_p_with_qtol(&fam, &cell.gamma, cell.epsilon, cfg.horizon_value(), &cfg.integrator(), cfg.qtol).map_err(|e| e.to_string())
}

/// Runs every cell of the grid. Output order is grid order regardless of the
/// worker count; a failing cell is reported and does not stop the others.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    run_sweep_with(cfg, |c| run_cell(c, cfg))
}

/// [`run_sweep`] with a caller-supplied cell evaluator.
pub fn run_sweep_with<F>(cfg: &SweepConfig, eval: F) -> Result<SweepReport>
where
    F: Fn(&Cell) -> std::result::Result<TransitionRecord, String> + Sync,
{
    let cells = grid(cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Parallelism::Workers(n) = cfg.parallelism {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("parallelism: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| cells.par_iter().map(&eval).collect());

    let mut report = SweepReport::default();
    for (cell, outcome) in cells.into_iter().zip(outcomes) {
        match outcome {
            Ok(rec) => report.records.push(rec),
            Err(reason) => {
                log::warn!("cell g={} gamma={} epsilon={} failed: {reason}", cell.g, cell.gamma, cell.epsilon);
                report.failures.push(CellFailure { cell, reason });
            }
        }
    }
    report.order_fits = group_fits(&report.records);
    Ok(report)
}

/// One order fit per `(g, γ)` group with at least three ε values.
pub fn group_fits(records: &[TransitionRecord]) -> Vec<GroupFit> {
    let mut groups: Vec<(f64, &str, Vec<TransitionRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(g, spec, _)| *g == r.g && *spec == r.gamma_desc) {
            Some(group) => group.2.push(r.clone()),
            None => groups.push((r.g, &r.gamma_desc, vec![r.clone()])),
        }
    }
    groups
        .into_iter()
        .filter(|(_, _, recs)| recs.len() >= 3)
        .filter_map(|(g, spec, recs)| match order_fit(&recs) {
            Ok(fit) => Some(GroupFit { g, gamma_spec: spec.to_string(), fit }),
            Err(e) => {
                log::info!("no order fit for g={g} gamma={spec}: {e}");
                None
            }
        })
        .collect()
}
