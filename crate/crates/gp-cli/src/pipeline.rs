//! The single-run pipeline: relax (decays off), evolve (decays on),
//! classify; artifacts on disk.

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output;
use gp_core::grid::{initial_gaussian, FieldPair, RadialGrid};
use gp_core::ground::{relax, GroundStateResult};
use gp_core::propagator::Propagator;
use gp_core::stability::{classify, EvolutionRecord, SeriesSample, StabilityVerdict};
use std::path::Path;
use std::time::Instant;

/// Everything a finished run produced.
pub struct RunOutcome {
    pub ground: GroundStateResult,
    pub record: EvolutionRecord,
    pub verdict: StabilityVerdict,
}

pub fn build_grid(cfg: &RunConfig) -> Result<RadialGrid> {
    RadialGrid::new(cfg.grid_nx, cfg.grid_x_max).map_err(CliError::from)
}

pub fn build_seed(cfg: &RunConfig, grid: &RadialGrid) -> Result<FieldPair> {
    initial_gaussian(grid, cfg.seed.width_a, cfg.seed.width_m, cfg.seed.mol_fraction)
        .map_err(CliError::from)
}

/// Relaxation stage (decay channels forced off inside `relax`).
pub fn run_ground(cfg: &RunConfig, grid: &RadialGrid) -> Result<GroundStateResult> {
    let seed = build_seed(cfg, grid)?;
    if !grid.vacuum_at_wall(&seed) {
        eprintln!(
            "warning: seed state is not vacuum at x_max = {}; enlarge grid.x_max",
            grid.x_max()
        );
    }
    let ground = relax(&cfg.dimensionless, grid, &seed, &cfg.relaxation)?;
    if !grid.vacuum_at_wall(&ground.fields) {
        eprintln!(
            "warning: relaxed state is not vacuum at x_max = {}; enlarge grid.x_max",
            grid.x_max()
        );
    }
    Ok(ground)
}

/// Evolution stage with the decay channels on.
pub fn run_evolution(
    cfg: &RunConfig,
    grid: &RadialGrid,
    initial: &FieldPair,
    observer: impl FnMut(&SeriesSample),
) -> Result<EvolutionRecord> {
    let mut prop = Propagator::new(&cfg.dimensionless, grid, cfg.stepping)?;
    let mut fields = initial.clone();
    fields.tau = 0.0;
    Ok(prop.evolve(&mut fields, cfg.dimensionless.tau_total, observer))
}

/// Full pipeline in memory: relax -> evolve -> classify.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutcome> {
    let grid = build_grid(cfg)?;
    let ground = run_ground(cfg, &grid)?;
    let record = run_evolution(cfg, &grid, &ground.fields, |_| {})?;
    let verdict = classify(&record, cfg.classify.window_fraction, &cfg.classify.thresholds);
    Ok(RunOutcome { ground, record, verdict })
}

/// Full pipeline with all artifacts written under `dir`. A blow-up during
/// evolution still produces a verdict and the partial record on disk.
pub fn run_single_to_dir(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    output::ensure_dir(dir)?;
    let grid = build_grid(cfg)?;
    let ground = run_ground(cfg, &grid)?;
    output::write_ground(dir, &ground, &grid)?;
    let record = run_evolution(cfg, &grid, &ground.fields, |_| {})?;
    output::write_series(dir, &record)?;
    output::write_snapshots(dir, &record, &grid)?;
    let verdict = classify(&record, cfg.classify.window_fraction, &cfg.classify.thresholds);
    let (g1, g2) = effective_gammas(cfg);
    output::write_verdict(dir, g1, g2, &verdict, &record)?;
    output::write_manifest(
        dir,
        "manifest.json",
        cfg,
        started.elapsed().as_secs_f64(),
        Some(&record.terminated),
    )?;
    Ok(RunOutcome { ground, record, verdict })
}

/// The decay strengths a run is labelled with: physical rates when the
/// physical route is active, dimensionless coefficients otherwise.
pub fn effective_gammas(cfg: &RunConfig) -> (f64, f64) {
    match &cfg.physical {
        Some(p) => (p.gamma1, p.gamma2),
        None => (cfg.dimensionless.g1_t, cfg.dimensionless.g2_t),
    }
}
