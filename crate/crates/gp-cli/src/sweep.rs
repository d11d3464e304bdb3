//! The (Gamma1, Gamma2) sweep: one relaxation, a Cartesian grid of
//! evolutions with the decay channels switched on, one verdict per cell.
//!
//! Cells are share-nothing tasks executed by a fixed worker pool; the
//! orchestrator is the only writer of the aggregate files and writes them
//! once, after all cells finish, sorted by (gamma1, gamma2) so reruns and
//! any parallelism produce byte-identical aggregates. A cell that fails
//! (blow-up handled by the classifier; panic or error recorded as a reason)
//! never aborts the sweep.

use crate::config::{RunConfig, SweepConfig, SweepMode};
use crate::error::{CliError, Result};
use crate::output;
use crate::pipeline;
use gp_core::stability::{classify, Label, SpeciesMetrics, StabilityVerdict};
use gp_core::units::{PhysicalConstants, PhysicalParams};
use serde_json::json;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CellResult {
    pub gamma1: f64,
    pub gamma2: f64,
    pub verdict: StabilityVerdict,
    pub terminated_early: bool,
    /// Panic or error text when the cell could not run to a verdict.
    pub failure: Option<String>,
}

pub struct SweepOutcome {
    pub cells: Vec<CellResult>,
    pub aggregate_csv: String,
    pub matrix_text: String,
}

fn unstable_verdict() -> StabilityVerdict {
    let zero = SpeciesMetrics { cv: 0.0, trend: 0.0, regularity: 0.0, collapsed: false };
    StabilityVerdict {
        label_atom: Label::Unstable,
        label_mol: Label::Unstable,
        atom: zero,
        mol: zero,
        insufficient_data: true,
    }
}

/// Per-cell parameter substitution.
fn cell_config(base: &RunConfig, sweep: &SweepConfig, g1: f64, g2: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    match sweep.mode {
        SweepMode::Dimensionless => {
            cfg.dimensionless.g1_t = g1;
            cfg.dimensionless.g2_t = g2;
        }
        SweepMode::Physical => {
            let p: &mut PhysicalParams = cfg
                .physical
                .as_mut()
                .ok_or_else(|| CliError::Config("physical sweep without [physical]".into()))?;
            p.gamma1 = g1;
            p.gamma2 = g2;
            let c = PhysicalConstants::codata();
            let d = gp_core::units::nondimensionalize(&c, p)?;
            cfg.dimensionless.g1_t = d.g1_t;
            cfg.dimensionless.g2_t = d.g2_t;
        }
    }
    Ok(cfg)
}

pub fn cell_dir_name(g1: f64, g2: f64) -> String {
    format!("cell_g1_{g1:e}_g2_{g2:e}")
}

/// Run the sweep with at most `parallelism` cells in flight.
pub fn run_sweep(base: &RunConfig, dir: &Path, parallelism: usize) -> Result<SweepOutcome> {
    let started = Instant::now();
    let sweep = base
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("no [sweep] section in config".into()))?;
    let workers = parallelism.max(1);
    output::ensure_dir(dir)?;
    let cells_dir = dir.join("cells");
    output::ensure_dir(&cells_dir)?;

    // One relaxation serves every cell: the decay channels are off during
    // initialization by construction, so the initial state is
    // cell-independent.
    let grid = pipeline::build_grid(base)?;
    let ground = pipeline::run_ground(base, &grid)?;
    output::write_ground(dir, &ground, &grid)?;

    let mut points = Vec::new();
    for &g1 in &sweep.gamma1_values {
        for &g2 in &sweep.gamma2_values {
            points.push((g1, g2));
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new(vec![None; points.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(points.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= points.len() {
                    break;
                }
                let (g1, g2) = points[idx];
                let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<CellResult> {
                    let cfg = cell_config(base, &sweep, g1, g2)?;
                    let cell_dir = cells_dir.join(cell_dir_name(g1, g2));
                    output::ensure_dir(&cell_dir)?;
                    let record =
                        pipeline::run_evolution(&cfg, &grid, &ground.fields, |_| {})?;
                    let verdict = classify(
                        &record,
                        cfg.classify.window_fraction,
                        &cfg.classify.thresholds,
                    );
                    output::write_series(&cell_dir, &record)?;
                    output::write_snapshots(&cell_dir, &record, &grid)?;
                    output::write_verdict(&cell_dir, g1, g2, &verdict, &record)?;
                    Ok(CellResult {
                        gamma1: g1,
                        gamma2: g2,
                        verdict,
                        terminated_early: record.terminated_early(),
                        failure: None,
                    })
                }));
                let result = match outcome {
                    Ok(Ok(cell)) => cell,
                    Ok(Err(e)) => CellResult {
                        gamma1: g1,
                        gamma2: g2,
                        verdict: unstable_verdict(),
                        terminated_early: true,
                        failure: Some(e.to_string()),
                    },
                    Err(panic) => {
                        let msg = panic
                            .downcast_ref::<&str>()
                            .map(|s| s.to_string())
                            .or_else(|| panic.downcast_ref::<String>().cloned())
                            .unwrap_or_else(|| "panic".into());
                        CellResult {
                            gamma1: g1,
                            gamma2: g2,
                            verdict: unstable_verdict(),
                            terminated_early: true,
                            failure: Some(format!("cell panicked: {msg}")),
                        }
                    }
                };
                results.lock().unwrap()[idx] = Some(result);
            });
        }
    });

    let mut cells: Vec<CellResult> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|c| c.expect("every cell produces a result"))
        .collect();
    cells.sort_by(|a, b| {
        (a.gamma1, a.gamma2)
            .partial_cmp(&(b.gamma1, b.gamma2))
            .expect("finite axis values")
    });

    for cell in cells.iter().filter(|c| c.failure.is_some()) {
        let cell_dir = cells_dir.join(cell_dir_name(cell.gamma1, cell.gamma2));
        output::ensure_dir(&cell_dir)?;
        output::write_text(
            &cell_dir,
            "error.txt",
            &format!("{}\n", cell.failure.as_deref().unwrap_or("unknown")),
        )?;
    }

    let aggregate_csv = render_aggregate(&cells);
    output::write_text(dir, "aggregate.csv", &aggregate_csv)?;
    let matrix_text = render_matrix(&sweep, &cells);
    output::write_text(dir, "matrix.txt", &matrix_text)?;

    let failures: Vec<_> = cells
        .iter()
        .filter_map(|c| {
            c.failure
                .as_ref()
                .map(|f| json!({"gamma1": c.gamma1, "gamma2": c.gamma2, "reason": f}))
        })
        .collect();
    let manifest = json!({
        "tool": "gp",
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "mode": match sweep.mode {
            SweepMode::Physical => "physical",
            SweepMode::Dimensionless => "dimensionless",
        },
        "gamma1_values": sweep.gamma1_values,
        "gamma2_values": sweep.gamma2_values,
        "parallelism": workers,
        "cells": points.len(),
        "failures": failures,
        "config": output::config_json(base),
    });
    output::write_text(
        dir,
        "sweep_manifest.json",
        &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()),
    )?;

    Ok(SweepOutcome { cells, aggregate_csv, matrix_text })
}

fn render_aggregate(cells: &[CellResult]) -> String {
    let mut out = String::from(
        "gamma1,gamma2,label_atom,label_mol,cv_a,cv_m,trend_a,trend_m,reg_a,reg_m,terminated_early\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.gamma1,
            c.gamma2,
            c.verdict.label_atom.code(),
            c.verdict.label_mol.code(),
            c.verdict.atom.cv,
            c.verdict.mol.cv,
            c.verdict.atom.trend,
            c.verdict.mol.trend,
            c.verdict.atom.regularity,
            c.verdict.mol.regularity,
            c.terminated_early
        ));
    }
    out
}

/// Plain-text stability matrix: rows are gamma1 (ascending), columns gamma2,
/// each cell `atom & molecule`.
fn render_matrix(sweep: &SweepConfig, cells: &[CellResult]) -> String {
    let mut g1s = sweep.gamma1_values.clone();
    let mut g2s = sweep.gamma2_values.clone();
    g1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g1s.dedup();
    g2s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g2s.dedup();

    let lookup = |g1: f64, g2: f64| -> &CellResult {
        cells
            .iter()
            .find(|c| c.gamma1 == g1 && c.gamma2 == g2)
            .expect("cell present for every grid point")
    };

    let mut out = String::new();
    out.push_str(&format!("{:>14}", "gamma1\\gamma2"));
    for &g2 in &g2s {
        out.push_str(&format!("{:>14}", format!("{g2:.3e}")));
    }
    out.push('\n');
    for &g1 in &g1s {
        out.push_str(&format!("{:>14}", format!("{g1:.3e}")));
        for &g2 in &g2s {
            let c = lookup(g1, g2);
            out.push_str(&format!(
                "{:>14}",
                format!("{} & {}", c.verdict.label_atom.code(), c.verdict.label_mol.code())
            ));
        }
        out.push('\n');
    }
    out.push_str("\nUn = unstable, Qs = quasistable, St = stable\n");
    out
}
