//! Run-configuration file: flat INI-style sections of `key = value` pairs.
//!
//! Sections: `[physical]`, `[dimensionless]`, `[grid]`, `[seed]`,
//! `[relaxation]`, `[stepping]`, `[classify]`, `[sweep]`, `[output]`.
//! Full-line comments start with `#` or `;`. Unknown sections or keys are
//! configuration errors (reported with their field path), as are invariant
//! violations.
//!
//! The physical route (`[physical]`, optionally seeded from
//! `preset = rb85-mfr`) derives every coefficient through the unit
//! reduction. Any coefficient set in `[dimensionless]` wins over the
//! physically derived value; each such override and every defaulted field is
//! recorded in the provenance log.

use crate::error::{CliError, Result};
use gp_core::stability::Thresholds;
use gp_core::units::{nondimensionalize, DimensionlessParams, PhysicalConstants, PhysicalParams};
use gp_core::{RelaxationSettings, StepSettings};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Desk-scale default evolution horizon in trap units.
pub const DESK_TAU_TOTAL: f64 = 60.0;
/// The full published horizon: 3.75 s in the rb85 trap.
pub const FULL_T_TOTAL_SECONDS: f64 = 3.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedConfig {
    pub width_a: f64,
    pub width_m: f64,
    pub mol_fraction: f64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self { width_a: 1.0, width_m: 1.0, mol_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub thresholds: Thresholds,
    pub window_fraction: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { thresholds: Thresholds::default(), window_fraction: 0.5 }
    }
}

/// Which quantities the sweep axes carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Axis values are Gamma1 (m^3 rad/s) and Gamma2 (rad/s), converted per
    /// cell through the unit reduction (requires `[physical]`).
    Physical,
    /// Axis values are the dimensionless g1_t and g2_t directly.
    Dimensionless,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub gamma1_values: Vec<f64>,
    pub gamma2_values: Vec<f64>,
    pub parallelism: Option<usize>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Present when the `[physical]` route was used.
    pub physical: Option<PhysicalParams>,
    /// Effective coefficients after applying `[dimensionless]` overrides.
    pub dimensionless: DimensionlessParams,
    pub grid_nx: usize,
    pub grid_x_max: f64,
    pub seed: SeedConfig,
    pub relaxation: RelaxationSettings,
    pub stepping: StepSettings,
    pub classify: ClassifyConfig,
    pub sweep: Option<SweepConfig>,
    pub output_dir: PathBuf,
    /// Defaulted fields and override decisions, in file order.
    pub provenance: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            physical: None,
            dimensionless: DimensionlessParams {
                tau_total: DESK_TAU_TOTAL,
                ..DimensionlessParams::free()
            },
            grid_nx: 2048,
            grid_x_max: 20.0,
            seed: SeedConfig::default(),
            relaxation: RelaxationSettings::default(),
            stepping: StepSettings::default(),
            classify: ClassifyConfig::default(),
            sweep: None,
            output_dir: PathBuf::from("out"),
            provenance: Vec::new(),
        }
    }
}

impl RunConfig {
    /// Load and validate a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse and validate config text.
    pub fn parse(text: &str) -> Result<Self> {
        let raw = parse_ini(text)?;
        build_config(raw)
    }

    /// The built-in preset alone (CLI `--preset`).
    pub fn from_preset(name: &str) -> Result<Self> {
        build_config(RawConfig {
            entries: vec![Entry {
                section: "physical".into(),
                key: "preset".into(),
                value: name.into(),
                line: 0,
            }],
        })
    }

    /// Restore the full published horizon (`--full`).
    pub fn apply_full_horizon(&mut self) {
        if let Some(p) = &mut self.physical {
            p.t_total = FULL_T_TOTAL_SECONDS;
            self.dimensionless.tau_total = p.omega * FULL_T_TOTAL_SECONDS;
        } else {
            // 3.75 s in the rb85 trap expressed in trap units.
            let c = PhysicalConstants::codata();
            let omega = PhysicalParams::rb85_mfr(&c).omega;
            self.dimensionless.tau_total = omega * FULL_T_TOTAL_SECONDS;
        }
        self.provenance
            .push(format!("--full: tau_total set to {}", self.dimensionless.tau_total));
    }
}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

struct RawConfig {
    entries: Vec<Entry>,
}

fn parse_ini(text: &str) -> Result<RawConfig> {
    let mut entries = Vec::new();
    let mut section = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::Config(format!("line {lineno}: malformed section header `{line}`")))?;
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {lineno}: expected `key = value`, got `{line}`"))
        })?;
        if section.is_empty() {
            return Err(CliError::Config(format!(
                "line {lineno}: `{}` appears before any [section]",
                key.trim()
            )));
        }
        entries.push(Entry {
            section: section.clone(),
            key: key.trim().to_ascii_lowercase(),
            value: value.trim().to_string(),
            line: lineno,
        });
    }
    Ok(RawConfig { entries })
}

/// Typed view over one section that tracks which keys were consumed.
struct Section<'a> {
    name: &'a str,
    values: BTreeMap<&'a str, (&'a str, usize)>,
}

impl<'a> Section<'a> {
    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.values.remove(key).map(|(v, _)| v)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| {
                CliError::Config(format!(
                    "{}.{key} (line {line}): `{v}` is not a number",
                    self.name
                ))
            }),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<usize>().map(Some).map_err(|_| {
                CliError::Config(format!(
                    "{}.{key} (line {line}): `{v}` is not a nonnegative integer",
                    self.name
                ))
            }),
        }
    }

    fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<f64>().map_err(|_| {
                        CliError::Config(format!(
                            "{}.{key} (line {line}): `{}` is not a number",
                            self.name,
                            item.trim()
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (_, line))) = self.values.into_iter().next() {
            return Err(CliError::Config(format!(
                "unknown key {}.{key} (line {line})",
                self.name
            )));
        }
        Ok(())
    }
}

const SECTIONS: &[&str] = &[
    "physical",
    "dimensionless",
    "grid",
    "seed",
    "relaxation",
    "stepping",
    "classify",
    "sweep",
    "output",
];

fn build_config(raw: RawConfig) -> Result<RunConfig> {
    for e in &raw.entries {
        if !SECTIONS.contains(&e.section.as_str()) {
            return Err(CliError::Config(format!(
                "unknown section [{}] (line {})",
                e.section, e.line
            )));
        }
    }
    let mut by_section: BTreeMap<&str, Section> = BTreeMap::new();
    for name in SECTIONS {
        by_section.insert(name, Section { name, values: BTreeMap::new() });
    }
    for e in &raw.entries {
        let sec = by_section.get_mut(e.section.as_str()).unwrap();
        if sec.values.insert(&e.key, (&e.value, e.line)).is_some() {
            return Err(CliError::Config(format!(
                "duplicate key {}.{} (line {})",
                e.section, e.key, e.line
            )));
        }
    }

    let mut cfg = RunConfig::default();
    let mut prov: Vec<String> = Vec::new();
    let constants = PhysicalConstants::codata();

    // [physical]
    let mut sec = by_section.remove("physical").unwrap();
    let physical_present = !sec.values.is_empty();
    let mut physical: Option<PhysicalParams> = None;
    if physical_present {
        let mut p = match sec.take("preset") {
            Some("rb85-mfr") => {
                prov.push("physical: preset rb85-mfr expanded".into());
                PhysicalParams::rb85_mfr(&constants)
            }
            Some(other) => {
                return Err(CliError::Config(format!(
                    "physical.preset: unknown preset `{other}` (available: rb85-mfr)"
                )))
            }
            None => PhysicalParams {
                mass: 0.0,
                omega: 0.0,
                n_atoms: 0.0,
                scattering_length: 0.0,
                a_bg: 0.0,
                delta_b: 0.0,
                delta_mu: 0.0,
                epsilon: 0.0,
                alpha: 0.0,
                gamma1: 0.0,
                gamma2: 0.0,
                t_total: 0.0,
            },
        };
        let explicit_t_total = sec.values.contains_key("t_total");
        if let Some(v) = sec.take_f64("mass")? {
            p.mass = v;
        }
        if let Some(v) = sec.take_f64("omega")? {
            p.omega = v;
        }
        if let Some(v) = sec.take_f64("n_atoms")? {
            p.n_atoms = v;
        }
        if let Some(v) = sec.take_f64("a")? {
            p.scattering_length = v;
        }
        if let Some(v) = sec.take_f64("a_bg")? {
            p.a_bg = v;
        }
        if let Some(v) = sec.take_f64("delta_b")? {
            p.delta_b = v;
        }
        if let Some(v) = sec.take_f64("delta_mu")? {
            p.delta_mu = v;
        }
        if let Some(v) = sec.take_f64("epsilon")? {
            p.epsilon = v;
        }
        if let Some(v) = sec.take_f64("alpha")? {
            p.alpha = v;
        }
        if let Some(v) = sec.take_f64("gamma1")? {
            p.gamma1 = v;
        }
        if let Some(v) = sec.take_f64("gamma2")? {
            p.gamma2 = v;
        }
        if let Some(v) = sec.take_f64("t_total")? {
            p.t_total = v;
        }
        if !explicit_t_total && p.omega > 0.0 {
            // Desk-scale horizon unless the config pins the physical time
            // (--full restores the published 3.75 s).
            p.t_total = DESK_TAU_TOTAL / p.omega;
            prov.push(format!(
                "defaulted physical.t_total = {} (tau_total = {DESK_TAU_TOTAL})",
                p.t_total
            ));
        }
        p.validate().map_err(|e| CliError::Config(format!("physical: {e}")))?;
        physical = Some(p);
    }
    sec.finish()?;

    // Derive coefficients from the physical route when present.
    let mut d = if let Some(p) = &physical {
        nondimensionalize(&constants, p).map_err(|e| CliError::Config(format!("physical: {e}")))?
    } else {
        DimensionlessParams { tau_total: DESK_TAU_TOTAL, ..DimensionlessParams::free() }
    };

    // [dimensionless] overrides.
    let mut sec = by_section.remove("dimensionless").unwrap();
    {
        let apply = |key: &str,
                         field: &mut f64,
                         sec: &mut Section,
                         prov: &mut Vec<String>|
         -> Result<()> {
            if let Some(v) = sec.take_f64(key)? {
                if physical_present {
                    prov.push(format!(
                        "dimensionless.{key} = {v} overrides the physically derived {}",
                        field
                    ));
                } else {
                    prov.push(format!("dimensionless.{key} = {v}"));
                }
                *field = v;
            }
            Ok(())
        };
        let g_a_before = d.g_a;
        if let Some(v) = sec.take_f64("g_a")? {
            if physical_present {
                prov.push(format!(
                    "dimensionless.g_a = {v} overrides the physically derived {g_a_before}"
                ));
            } else {
                prov.push(format!("dimensionless.g_a = {v}"));
            }
            d.g_a = v;
            // One shared contact coefficient unless the
            // config splits them explicitly.
            d.g_m = v;
            d.g_am = v;
        }
        apply("g_m", &mut d.g_m, &mut sec, &mut prov)?;
        apply("g_am", &mut d.g_am, &mut sec, &mut prov)?;
        apply("chi_t", &mut d.chi_t, &mut sec, &mut prov)?;
        apply("eps_t", &mut d.eps_t, &mut sec, &mut prov)?;
        apply("alpha_t", &mut d.alpha_t, &mut sec, &mut prov)?;
        apply("g1_t", &mut d.g1_t, &mut sec, &mut prov)?;
        apply("g2_t", &mut d.g2_t, &mut sec, &mut prov)?;
        apply("a_ho", &mut d.a_ho, &mut sec, &mut prov)?;
        apply("tau_total", &mut d.tau_total, &mut sec, &mut prov)?;
    }
    sec.finish()?;
    d.validate().map_err(|e| CliError::Config(format!("dimensionless: {e}")))?;

    // [grid]
    let mut sec = by_section.remove("grid").unwrap();
    if let Some(v) = sec.take_usize("nx")? {
        cfg.grid_nx = v;
    } else {
        prov.push(format!("defaulted grid.nx = {}", cfg.grid_nx));
    }
    if let Some(v) = sec.take_f64("x_max")? {
        cfg.grid_x_max = v;
    } else {
        prov.push(format!("defaulted grid.x_max = {}", cfg.grid_x_max));
    }
    sec.finish()?;

    // [seed]
    let mut sec = by_section.remove("seed").unwrap();
    if let Some(v) = sec.take_f64("width_a")? {
        cfg.seed.width_a = v;
    }
    if let Some(v) = sec.take_f64("width_m")? {
        cfg.seed.width_m = v;
    }
    if let Some(v) = sec.take_f64("mol_fraction")? {
        cfg.seed.mol_fraction = v;
    }
    if !(0.0..=1.0).contains(&cfg.seed.mol_fraction) {
        return Err(CliError::Config(format!(
            "seed.mol_fraction = {} outside [0, 1]",
            cfg.seed.mol_fraction
        )));
    }
    sec.finish()?;

    // [relaxation]
    let mut sec = by_section.remove("relaxation").unwrap();
    if let Some(v) = sec.take_f64("dtau_imag")? {
        cfg.relaxation.dtau_imag = v;
    }
    if let Some(v) = sec.take_usize("max_iters")? {
        cfg.relaxation.max_iters = v;
    }
    if let Some(v) = sec.take_f64("mu_tol")? {
        cfg.relaxation.mu_tol = v;
    }
    if let Some(v) = sec.take_usize("renorm_every")? {
        cfg.relaxation.renorm_every = v;
    }
    cfg.relaxation
        .validate()
        .map_err(|e| CliError::Config(format!("relaxation: {e}")))?;
    sec.finish()?;

    // [stepping]
    let mut sec = by_section.remove("stepping").unwrap();
    if let Some(v) = sec.take_f64("dtau")? {
        cfg.stepping.dtau = v;
    } else {
        prov.push(format!("defaulted stepping.dtau = {}", cfg.stepping.dtau));
    }
    if let Some(v) = sec.take_usize("fp_iters")? {
        cfg.stepping.fp_iters = v;
    }
    if let Some(v) = sec.take_usize("series_stride")? {
        cfg.stepping.series_stride = v;
    }
    if let Some(v) = sec.take_usize("snapshot_stride")? {
        cfg.stepping.snapshot_stride = Some(v);
    }
    if let Some(v) = sec.take_f64("blowup_threshold")? {
        cfg.stepping.blowup_threshold = v;
    }
    cfg.stepping
        .validate()
        .map_err(|e| CliError::Config(format!("stepping: {e}")))?;
    sec.finish()?;

    // [classify]
    let mut sec = by_section.remove("classify").unwrap();
    let th = &mut cfg.classify.thresholds;
    if let Some(v) = sec.take_f64("cv_lo")? {
        th.cv_lo = v;
    }
    if let Some(v) = sec.take_f64("cv_hi")? {
        th.cv_hi = v;
    }
    if let Some(v) = sec.take_f64("trend_max")? {
        th.trend_max = v;
    }
    if let Some(v) = sec.take_f64("reg_min")? {
        th.reg_min = v;
    }
    if let Some(v) = sec.take_f64("floor_frac")? {
        th.floor_frac = v;
    }
    if let Some(v) = sec.take_f64("window_fraction")? {
        cfg.classify.window_fraction = v;
    }
    if !(cfg.classify.window_fraction > 0.0 && cfg.classify.window_fraction <= 1.0) {
        return Err(CliError::Config(format!(
            "classify.window_fraction = {} outside (0, 1]",
            cfg.classify.window_fraction
        )));
    }
    for (name, v) in [
        ("cv_lo", th.cv_lo),
        ("cv_hi", th.cv_hi),
        ("trend_max", th.trend_max),
        ("reg_min", th.reg_min),
        ("floor_frac", th.floor_frac),
    ] {
        if !(v >= 0.0) {
            return Err(CliError::Config(format!("classify.{name} = {v} must be >= 0")));
        }
    }
    sec.finish()?;

    // [sweep]
    let mut sec = by_section.remove("sweep").unwrap();
    let sweep_present = !sec.values.is_empty();
    if sweep_present {
        let mode = match sec.take("mode") {
            None | Some("dimensionless") => SweepMode::Dimensionless,
            Some("physical") => SweepMode::Physical,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "sweep.mode: `{other}` (expected physical or dimensionless)"
                )))
            }
        };
        let gamma1_values = sec
            .take_f64_list("gamma1_values")?
            .ok_or_else(|| CliError::Config("sweep.gamma1_values is required".into()))?;
        let gamma2_values = sec
            .take_f64_list("gamma2_values")?
            .ok_or_else(|| CliError::Config("sweep.gamma2_values is required".into()))?;
        if gamma1_values.is_empty() || gamma2_values.is_empty() {
            return Err(CliError::Config("sweep value lists must be nonempty".into()));
        }
        for (name, values) in [("gamma1_values", &gamma1_values), ("gamma2_values", &gamma2_values)]
        {
            if values.iter().any(|v| !(*v >= 0.0)) {
                return Err(CliError::Config(format!("sweep.{name}: values must be >= 0")));
            }
        }
        if mode == SweepMode::Physical && physical.is_none() {
            return Err(CliError::Config(
                "sweep.mode = physical requires a [physical] section".into(),
            ));
        }
        let parallelism = sec.take_usize("parallelism")?;
        cfg.sweep = Some(SweepConfig { mode, gamma1_values, gamma2_values, parallelism });
    }
    sec.finish()?;

    // [output]
    let mut sec = by_section.remove("output").unwrap();
    if let Some(v) = sec.take("dir") {
        cfg.output_dir = PathBuf::from(v);
    } else if let Ok(env_dir) = std::env::var("GP_OUTPUT_DIR") {
        cfg.output_dir = PathBuf::from(env_dir);
        prov.push(format!("output.dir from GP_OUTPUT_DIR = {}", cfg.output_dir.display()));
    } else {
        prov.push(format!("defaulted output.dir = {}", cfg.output_dir.display()));
    }
    sec.finish()?;

    cfg.physical = physical;
    cfg.dimensionless = d;
    cfg.provenance = prov;
    Ok(cfg)
}
