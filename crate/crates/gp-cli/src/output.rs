//! File formats: series CSV, profile-snapshot CSV, verdict/summary JSON,
//! run manifests and the sweep aggregate.

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use gp_core::grid::RadialGrid;
use gp_core::ground::GroundStateResult;
use gp_core::stability::{EvolutionRecord, Snapshot, StabilityVerdict, Termination};
use gp_core::C64;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("mkdir {}", dir.display()), e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::io(&format!("create {}", path.display()), e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(&format!("write {}", path.display()), e))
}

/// Scalar series: `tau,n_a,n_m,peak_a,peak_m,width_a,width_m`.
pub fn series_csv(record: &EvolutionRecord) -> String {
    let mut out = String::from("tau,n_a,n_m,peak_a,peak_m,width_a,width_m\n");
    for s in &record.series {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.tau, s.n_a, s.n_m, s.peak_a, s.peak_m, s.width_a, s.width_m
        ));
    }
    out
}

/// Profile snapshots: `tau,x,dens_a,dens_m,re_a,im_a,re_m,im_m`, one row per
/// grid point per snapshot. Densities are physical (`|phi/x|^2`).
pub fn snapshots_csv(snapshots: &[Snapshot], grid: &RadialGrid) -> String {
    let mut out = String::from("tau,x,dens_a,dens_m,re_a,im_a,re_m,im_m\n");
    for snap in snapshots {
        for (j, &x) in grid.x().iter().enumerate() {
            let a: C64 = snap.phi_a[j];
            let m: C64 = snap.phi_m[j];
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                snap.tau,
                x,
                a.norm_sqr() / (x * x),
                m.norm_sqr() / (x * x),
                a.re,
                a.im,
                m.re,
                m.im
            ));
        }
    }
    out
}

pub fn write_series(dir: &Path, record: &EvolutionRecord) -> Result<()> {
    write_file(&dir.join("series.csv"), &series_csv(record))
}

pub fn write_snapshots(dir: &Path, record: &EvolutionRecord, grid: &RadialGrid) -> Result<()> {
    if record.snapshots.is_empty() {
        return Ok(());
    }
    write_file(&dir.join("snapshots.csv"), &snapshots_csv(&record.snapshots, grid))
}

pub fn write_ground(
    dir: &Path,
    ground: &GroundStateResult,
    grid: &RadialGrid,
) -> Result<()> {
    let profile = Snapshot {
        tau: 0.0,
        phi_a: ground.fields.phi_a.clone(),
        phi_m: ground.fields.phi_m.clone(),
    };
    write_file(&dir.join("ground_profile.csv"), &snapshots_csv(&[profile], grid))?;
    let (n_a, n_m) = gp_core::grid::norms(&ground.fields, grid);
    let summary = json!({
        "mu_a": ground.mu_a,
        "mu_m": ground.mu_m,
        "iterations": ground.iterations,
        "converged": ground.converged,
        "n_a": n_a,
        "n_m": n_m,
    });
    write_file(&dir.join("ground_summary.json"), &format!("{summary}\n"))
}

/// One verdict JSON object per run.
pub fn verdict_json(gamma1: f64, gamma2: f64, verdict: &StabilityVerdict, record: &EvolutionRecord) -> Value {
    json!({
        "gamma1": gamma1,
        "gamma2": gamma2,
        "label_atom": verdict.label_atom.code(),
        "label_mol": verdict.label_mol.code(),
        "cv_a": verdict.atom.cv,
        "cv_m": verdict.mol.cv,
        "trend_a": verdict.atom.trend,
        "trend_m": verdict.mol.trend,
        "reg_a": verdict.atom.regularity,
        "reg_m": verdict.mol.regularity,
        "terminated_early": record.terminated_early(),
    })
}

pub fn write_verdict(
    dir: &Path,
    gamma1: f64,
    gamma2: f64,
    verdict: &StabilityVerdict,
    record: &EvolutionRecord,
) -> Result<()> {
    let v = verdict_json(gamma1, gamma2, verdict, record);
    write_file(&dir.join("verdict.json"), &format!("{v}\n"))
}

fn termination_json(t: &Termination) -> Value {
    match t {
        Termination::Completed => json!("completed"),
        Termination::BlowUp { tau, grid_index } => {
            json!({"blow_up": {"tau": tau, "grid_index": grid_index}})
        }
    }
}

/// Config echo for the manifest; every number a run needs to be reproduced.
pub fn config_json(cfg: &RunConfig) -> Value {
    let d = &cfg.dimensionless;
    let physical = cfg.physical.as_ref().map(|p| {
        json!({
            "mass": p.mass,
            "omega": p.omega,
            "n_atoms": p.n_atoms,
            "a": p.scattering_length,
            "a_bg": p.a_bg,
            "delta_b": p.delta_b,
            "delta_mu": p.delta_mu,
            "epsilon": p.epsilon,
            "alpha": p.alpha,
            "gamma1": p.gamma1,
            "gamma2": p.gamma2,
            "t_total": p.t_total,
        })
    });
    json!({
        "physical": physical,
        "dimensionless": {
            "g_a": d.g_a, "g_m": d.g_m, "g_am": d.g_am,
            "chi_t": d.chi_t, "eps_t": d.eps_t, "alpha_t": d.alpha_t,
            "g1_t": d.g1_t, "g2_t": d.g2_t,
            "a_ho": d.a_ho, "tau_total": d.tau_total,
        },
        "grid": {"nx": cfg.grid_nx, "x_max": cfg.grid_x_max},
        "seed": {
            "width_a": cfg.seed.width_a,
            "width_m": cfg.seed.width_m,
            "mol_fraction": cfg.seed.mol_fraction,
        },
        "relaxation": {
            "dtau_imag": cfg.relaxation.dtau_imag,
            "max_iters": cfg.relaxation.max_iters,
            "mu_tol": cfg.relaxation.mu_tol,
            "renorm_every": cfg.relaxation.renorm_every,
        },
        "stepping": {
            "dtau": cfg.stepping.dtau,
            "fp_iters": cfg.stepping.fp_iters,
            "series_stride": cfg.stepping.series_stride,
            "snapshot_stride": cfg.stepping.snapshot_stride,
            "blowup_threshold": cfg.stepping.blowup_threshold,
        },
        "classify": {
            "cv_lo": cfg.classify.thresholds.cv_lo,
            "cv_hi": cfg.classify.thresholds.cv_hi,
            "trend_max": cfg.classify.thresholds.trend_max,
            "reg_min": cfg.classify.thresholds.reg_min,
            "floor_frac": cfg.classify.thresholds.floor_frac,
            "window_fraction": cfg.classify.window_fraction,
        },
    })
}

/// Run manifest: config echo, tool version, wall time, provenance log.
pub fn write_manifest(
    dir: &Path,
    name: &str,
    cfg: &RunConfig,
    wall_time_s: f64,
    termination: Option<&Termination>,
) -> Result<()> {
    let manifest = json!({
        "tool": "gp",
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall_time_s,
        "termination": termination.map(termination_json),
        "provenance": cfg.provenance,
        "config": config_json(cfg),
    });
    write_file(
        &dir.join(name),
        &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()),
    )
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    write_file(&dir.join(name), text)
}
