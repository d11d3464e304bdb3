//! `gp` — coupled atom-molecule condensate runs from config files.

use clap::{Args, Parser, Subcommand};
use gp_cli::config::RunConfig;
use gp_cli::error::{CliError, Result};
use gp_cli::{output, pipeline, sweep};
use gp_core::units::{
    coupling_chi, coupling_lambda, oscillator_length, PhysicalConstants,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Published reference value for the resonance coupling chi/hbar of the
/// rb85 set, in m^(3/2) rad/s.
const CHI_REFERENCE: f64 = 3107.377e-7;
const CHI_TOLERANCE: f64 = 1e-3;

#[derive(Parser)]
#[command(
    name = "gp",
    version,
    about = "Coupled dissipative Gross-Pitaevskii runs: ground states, evolutions and decay-strength stability sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run-configuration file (INI-style sections)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter preset (rb85-mfr); merges under any config file
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides config and GP_OUTPUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restore the full published horizon (3.75 s) instead of the
    /// desk-scale default
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print physical inputs and every derived coefficient with its formula
    Describe(CommonArgs),
    /// Relax to the decay-free initial state; write profile and summary
    Ground(CommonArgs),
    /// Relax, then evolve with the decay channels on; write series run data
    Evolve(CommonArgs),
    /// Full pipeline: relax, evolve, classify; write all artifacts
    Run(CommonArgs),
    /// Cartesian (gamma1, gamma2) sweep producing the stability matrix
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Maximum cells in flight
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Recompute the resonance coupling from first principles and compare
    /// to the published reference value
    ChiCheck(CommonArgs),
}

fn load_config(common: &CommonArgs, default_preset: bool) -> Result<RunConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(preset)) => RunConfig::from_preset(preset)?,
        (Some(path), Some(preset)) => {
            // The preset seeds [physical]; explicit config keys override it.
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&format!("[physical]\npreset = {preset}\n{text}"))?
        }
        (None, None) if default_preset => RunConfig::from_preset("rb85-mfr")?,
        (None, None) => {
            return Err(CliError::Config(
                "need --config <path> or --preset <name>".into(),
            ))
        }
    };
    if let Some(dir) = &common.out {
        cfg.output_dir = dir.clone();
    }
    if common.full {
        cfg.apply_full_horizon();
    }
    Ok(cfg)
}

fn describe_text(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let d = &cfg.dimensionless;
    if let Some(p) = &cfg.physical {
        let c = PhysicalConstants::codata();
        out.push_str("physical inputs (SI)\n");
        out.push_str(&format!("  mass      = {:e} kg\n", p.mass));
        out.push_str(&format!("  omega     = {:e} rad/s\n", p.omega));
        out.push_str(&format!("  n_atoms   = {}\n", p.n_atoms));
        out.push_str(&format!("  a         = {:e} m\n", p.scattering_length));
        out.push_str(&format!("  a_bg      = {:e} m\n", p.a_bg));
        out.push_str(&format!("  delta_b   = {:e} T\n", p.delta_b));
        out.push_str(&format!("  delta_mu  = {:e} J/T\n", p.delta_mu));
        out.push_str(&format!("  epsilon   = {:e} rad/s\n", p.epsilon));
        out.push_str(&format!("  alpha     = {:e} rad/s\n", p.alpha));
        out.push_str(&format!("  gamma1    = {:e} m^3 rad/s\n", p.gamma1));
        out.push_str(&format!("  gamma2    = {:e} rad/s\n", p.gamma2));
        out.push_str(&format!("  t_total   = {} s\n", p.t_total));
        out.push_str("\nderived couplings (SI)\n");
        let a_ho = oscillator_length(&c, p.mass, p.omega).unwrap_or(f64::NAN);
        let lambda = coupling_lambda(&c, p.scattering_length, p.mass).unwrap_or(f64::NAN);
        let chi = coupling_chi(p.a_bg, p.delta_mu, p.delta_b, p.mass).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "  a_ho      = sqrt(hbar/(m omega))          = {a_ho:e} m\n"
        ));
        out.push_str(&format!(
            "  lambda_a  = 4 pi hbar^2 a / m             = {lambda:e} J m^3\n"
        ));
        out.push_str(&format!(
            "  chi/hbar  = sqrt(8 pi a_bg dmu dB / m)    = {chi:e} m^(3/2) rad/s\n"
        ));
        out.push_str("\ndimensionless coefficients (x = r/a_ho, tau = omega t)\n");
        out.push_str(&format!(
            "  g_a       = 4 pi N a / a_ho               = {:e}\n",
            d.g_a
        ));
        out.push_str(&format!("  g_m       = g_a (one contact coefficient) = {:e}\n", d.g_m));
        out.push_str(&format!("  g_am      = g_a (one contact coefficient) = {:e}\n", d.g_am));
        out.push_str(&format!(
            "  chi_t     = (chi/hbar) sqrt(N/a_ho^3)/omega = {:e}\n",
            d.chi_t
        ));
        out.push_str(&format!("  eps_t     = epsilon / omega               = {:e}\n", d.eps_t));
        out.push_str(&format!("  alpha_t   = alpha / omega                 = {:e}\n", d.alpha_t));
        out.push_str(&format!(
            "  g1_t      = gamma1 N / (a_ho^3 omega)     = {:e}\n",
            d.g1_t
        ));
        out.push_str(&format!("  g2_t      = gamma2 / omega                = {:e}\n", d.g2_t));
        out.push_str(&format!("  tau_total = omega t_total                 = {:e}\n", d.tau_total));
    } else {
        out.push_str("dimensionless coefficients (direct specification)\n");
        out.push_str(&format!("  g_a       = {:e}\n", d.g_a));
        out.push_str(&format!("  g_m       = {:e}\n", d.g_m));
        out.push_str(&format!("  g_am      = {:e}\n", d.g_am));
        out.push_str(&format!("  chi_t     = {:e}\n", d.chi_t));
        out.push_str(&format!("  eps_t     = {:e}\n", d.eps_t));
        out.push_str(&format!("  alpha_t   = {:e}\n", d.alpha_t));
        out.push_str(&format!("  g1_t      = {:e}\n", d.g1_t));
        out.push_str(&format!("  g2_t      = {:e}\n", d.g2_t));
        out.push_str(&format!("  a_ho      = {:e} m\n", d.a_ho));
        out.push_str(&format!("  tau_total = {:e}\n", d.tau_total));
    }
    if !cfg.provenance.is_empty() {
        out.push_str("\nprovenance\n");
        for line in &cfg.provenance {
            out.push_str(&format!("  - {line}\n"));
        }
    }
    out
}

fn cmd_chi_check(common: &CommonArgs) -> Result<u8> {
    let cfg = load_config(common, true)?;
    let p = cfg.physical.ok_or_else(|| {
        CliError::Config("chi-check needs physical parameters (config [physical] or --preset)".into())
    })?;
    let chi = coupling_chi(p.a_bg, p.delta_mu, p.delta_b, p.mass)?;
    let rel = (chi - CHI_REFERENCE).abs() / CHI_REFERENCE;
    let ok = rel <= CHI_TOLERANCE;
    println!(
        "chi/hbar = sqrt(8 pi a_bg dmu dB / m) = {chi:e} m^(3/2) rad/s\n\
         reference {CHI_REFERENCE:e}, relative error {rel:.3e} (tolerance {CHI_TOLERANCE:e}) -> {}",
        if ok { "OK" } else { "MISMATCH" }
    );
    Ok(if ok { 0 } else { 1 })
}

fn cmd_ground(common: &CommonArgs) -> Result<u8> {
    let cfg = load_config(common, false)?;
    let started = Instant::now();
    output::ensure_dir(&cfg.output_dir)?;
    let grid = pipeline::build_grid(&cfg)?;
    let ground = pipeline::run_ground(&cfg, &grid)?;
    output::write_ground(&cfg.output_dir, &ground, &grid)?;
    output::write_manifest(
        &cfg.output_dir,
        "manifest.json",
        &cfg,
        started.elapsed().as_secs_f64(),
        None,
    )?;
    let (n_a, n_m) = gp_core::grid::norms(&ground.fields, &grid);
    println!(
        "{}",
        serde_json::json!({
            "mu_a": ground.mu_a, "mu_m": ground.mu_m,
            "iterations": ground.iterations, "converged": ground.converged,
            "n_a": n_a, "n_m": n_m,
        })
    );
    Ok(0)
}

fn cmd_evolve(common: &CommonArgs) -> Result<u8> {
    let cfg = load_config(common, false)?;
    let started = Instant::now();
    output::ensure_dir(&cfg.output_dir)?;
    let grid = pipeline::build_grid(&cfg)?;
    let ground = pipeline::run_ground(&cfg, &grid)?;
    output::write_ground(&cfg.output_dir, &ground, &grid)?;
    let record = pipeline::run_evolution(&cfg, &grid, &ground.fields, |_| {})?;
    output::write_series(&cfg.output_dir, &record)?;
    output::write_snapshots(&cfg.output_dir, &record, &grid)?;
    output::write_manifest(
        &cfg.output_dir,
        "manifest.json",
        &cfg,
        started.elapsed().as_secs_f64(),
        Some(&record.terminated),
    )?;
    if record.terminated_early() {
        eprintln!("evolution terminated early: {:?}", record.terminated);
        return Ok(3);
    }
    println!(
        "evolved to tau = {} ({} samples)",
        record.series.last().map(|s| s.tau).unwrap_or(0.0),
        record.series.len()
    );
    Ok(0)
}

fn cmd_run(common: &CommonArgs) -> Result<u8> {
    let cfg = load_config(common, false)?;
    let outcome = pipeline::run_single_to_dir(&cfg, &cfg.output_dir.clone())?;
    let (g1, g2) = pipeline::effective_gammas(&cfg);
    println!(
        "{}",
        output::verdict_json(g1, g2, &outcome.verdict, &outcome.record)
    );
    // Completion, not the verdict, decides the exit status.
    Ok(0)
}

fn cmd_sweep(common: &CommonArgs, parallel: Option<usize>) -> Result<u8> {
    let cfg = load_config(common, false)?;
    let parallelism = parallel
        .or_else(|| cfg.sweep.as_ref().and_then(|s| s.parallelism))
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    let dir = cfg.output_dir.clone();
    let outcome = sweep::run_sweep(&cfg, &dir, parallelism)?;
    print!("{}", outcome.matrix_text);
    println!(
        "aggregate: {} ({} cells)",
        dir.join("aggregate.csv").display(),
        outcome.cells.len()
    );
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Describe(common) => {
            let cfg = load_config(common, false)?;
            print!("{}", describe_text(&cfg));
            Ok(0)
        }
        Command::Ground(common) => cmd_ground(common),
        Command::Evolve(common) => cmd_evolve(common),
        Command::Run(common) => cmd_run(common),
        Command::Sweep { common, parallel } => cmd_sweep(common, *parallel),
        Command::ChiCheck(common) => cmd_chi_check(common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
