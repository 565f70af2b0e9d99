use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use super::config::{Algorithm, RunConfig};
use super::metrics::steps_to_fraction;
use super::train::train;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

pub const ABLATION_HEADER: &str =
    "beam_width,rollout_depth,final_eval_mean,final_eval_std,steps_to_90pct,rollout_steps_total,wall_seconds";

/// One trained configuration of the grid. The TD3 row has `algorithm == Td3`
/// and is written with `rollout_depth = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationCell {
    pub algorithm: Algorithm,
    pub beam_width: usize,
    pub rollout_depth: usize,
    pub final_eval_mean: f64,
    pub final_eval_std: f64,
    pub steps_to_90pct: Option<u64>,
    pub rollout_steps_total: u64,
    /// Largest rollout charge of any single planning call.
    pub max_rollout_steps_per_call: u64,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AblationGrid {
    /// TD3 row first, then `(B, D)` cells in list order.
    pub cells: Vec<AblationCell>,
    pub csv_path: PathBuf,
}

impl AblationGrid {
    pub fn cell(&self, beam_width: usize, rollout_depth: usize) -> Option<&AblationCell> {
        self.cells.iter().find(|c| {
            c.algorithm == Algorithm::McbsTd3 && c.beam_width == beam_width && c.rollout_depth == rollout_depth
        })
    }

    pub fn td3_row(&self) -> &AblationCell {
        &self.cells[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{ABLATION_HEADER}\n");
        for c in &self.cells {
            let steps = c
                .steps_to_90pct
                .map_or_else(|| "not_reached".to_string(), |s| s.to_string());
            let wall = if c.wall_seconds.is_finite() { c.wall_seconds } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.beam_width,
                c.rollout_depth,
                c.final_eval_mean,
                c.final_eval_std,
                steps,
                c.rollout_steps_total,
                wall
            );
        }
        out
    }
}

fn run_cell(cfg: RunConfig) -> AblationCell {
    let started = Instant::now();
    let depth = match cfg.algorithm {
        Algorithm::Td3 => 0,
        Algorithm::McbsTd3 => cfg.mcbs.rollout_depth,
    };
    let beam_width = match cfg.algorithm {
        Algorithm::Td3 => 1,
        Algorithm::McbsTd3 => cfg.mcbs.beam_width,
    };
    let record_wall = cfg.record_wall_time;
    let mut cell = AblationCell {
        algorithm: cfg.algorithm,
        beam_width,
        rollout_depth: depth,
        final_eval_mean: f64::NAN,
        final_eval_std: f64::NAN,
        steps_to_90pct: None,
        rollout_steps_total: 0,
        max_rollout_steps_per_call: 0,
        wall_seconds: 0.0,
        error: None,
    };
    match train(&cfg) {
        Ok(outcome) => {
            if let Some(last) = outcome.final_row() {
                cell.final_eval_mean = last.eval_return_mean;
                cell.final_eval_std = last.eval_return_std;
            }
            cell.steps_to_90pct = steps_to_fraction(&outcome.rows, 0.9, outcome.random_baseline);
            cell.rollout_steps_total = outcome.ledger.rollout_env_steps;
            cell.max_rollout_steps_per_call = outcome.ledger.max_rollout_steps_per_call;
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    if record_wall {
        cell.wall_seconds = started.elapsed().as_secs_f64();
    }
    cell
}

/// Trains the plain TD3 row plus one MCBS-TD3 run per `(B, D)` pair and
/// writes `ablation.csv` into `base.out_dir`. Failed cells are kept with
/// NaN results and their message in `ablation_errors.txt`.
pub fn ablate(base: &RunConfig, beams: &[usize], depths: &[usize]) -> Result<AblationGrid> {
    if beams.is_empty() || depths.is_empty() {
        return Err(Error::InvalidArgument("beam and depth lists must be non-empty".into()));
    }
    fs::create_dir_all(&base.out_dir)?;

    let mut configs = vec![RunConfig {
        algorithm: Algorithm::Td3,
        out_dir: base.out_dir.join("td3"),
        ..base.clone()
    }];
    for &b in beams {
        for &d in depths {
            let mut cfg = RunConfig {
                algorithm: Algorithm::McbsTd3,
                out_dir: base.out_dir.join(format!("mcbs_b{b}_d{d}")),
                ..base.clone()
            };
            cfg.mcbs.beam_width = b;
            cfg.mcbs.rollout_depth = d;
            configs.push(cfg);
        }
    }

    let cells = map_indexed(configs.len(), base.mcbs.execution, |i| {
        let mut cfg = configs[i].clone();
        // The grid is the parallel axis; runs inside it stay sequential.
        if base.mcbs.execution == Execution::Parallel {
            cfg.mcbs.execution = Execution::Sequential;
        }
        run_cell(cfg)
    });

    let grid = AblationGrid {
        cells,
        csv_path: base.out_dir.join("ablation.csv"),
    };
    fs::write(&grid.csv_path, grid.to_csv())?;
    let errors: String = grid
        .cells
        .iter()
        .filter_map(|c| {
            c.error
                .as_ref()
                .map(|e| format!("{} B={} D={}: {e}\n", c.algorithm, c.beam_width, c.rollout_depth))
        })
        .collect();
    if !errors.is_empty() {
        fs::write(base.out_dir.join("ablation_errors.txt"), errors)?;
    }
    Ok(grid)
}
