//! Scalar observables and the three-way soliton stability classifier.
//!
//! A run is reduced to time series of peak density, norm and rms width per
//! species; the classifier looks only at the final `window_fraction` of the
//! peak-density series (the initial transient is excluded) and labels each
//! species Stable, Quasistable or Unstable from three scale-free metrics:
//!
//! - `cv`: coefficient of variation of the peak density over the window
//! - `trend`: relative linear drift across the window (least-squares slope
//!   times window length, over the fitted window-start value)
//! - `regularity`: fraction of the mean-removed spectral power concentrated
//!   in the dominant periodogram bin and its two neighbours
//!
//! "Quasistable" operationalizes a constant envelope carrying fine regular
//! amplitude oscillations: moderate cv, high spectral concentration, no
//! drift.

use crate::grid::{FieldPair, RadialGrid};
use crate::C64;
use alloc::vec::Vec;
use libm::{cos, sin, sqrt};

/// One scalar-observable sample along an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSample {
    pub tau: f64,
    pub n_a: f64,
    pub n_m: f64,
    pub peak_a: f64,
    pub peak_m: f64,
    pub width_a: f64,
    pub width_m: f64,
}

/// Full profile dump at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub tau: f64,
    pub phi_a: Vec<C64>,
    pub phi_m: Vec<C64>,
}

/// How an evolution ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    BlowUp { tau: f64, grid_index: usize },
}

/// Everything recorded along one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub series: Vec<SeriesSample>,
    pub snapshots: Vec<Snapshot>,
    pub terminated: Termination,
}

impl EvolutionRecord {
    pub fn terminated_early(&self) -> bool {
        !matches!(self.terminated, Termination::Completed)
    }
}

/// Stability label in increasing order of health.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Unstable,
    Quasistable,
    Stable,
}

impl Label {
    /// Table-style two-letter code.
    pub fn code(self) -> &'static str {
        match self {
            Label::Unstable => "Un",
            Label::Quasistable => "Qs",
            Label::Stable => "St",
        }
    }
}

/// Classifier thresholds. All five are relative measures, so verdicts are
/// invariant under positive rescaling of the peak series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Stable needs cv at or below this.
    pub cv_lo: f64,
    /// Above this cv the series is Unstable outright.
    pub cv_hi: f64,
    /// Relative drift at or beyond this magnitude is Unstable.
    pub trend_max: f64,
    /// Quasistable needs at least this spectral concentration.
    pub reg_min: f64,
    /// Peak falling below this fraction of its window-initial value counts
    /// as collapse.
    pub floor_frac: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { cv_lo: 0.02, cv_hi: 0.15, trend_max: 0.1, reg_min: 0.6, floor_frac: 0.05 }
    }
}

/// Per-species classification metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesMetrics {
    pub cv: f64,
    pub trend: f64,
    pub regularity: f64,
    pub collapsed: bool,
}

impl SpeciesMetrics {
    fn zero() -> Self {
        Self { cv: 0.0, trend: 0.0, regularity: 0.0, collapsed: false }
    }
}

/// Verdict for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub label_atom: Label,
    pub label_mol: Label,
    pub atom: SpeciesMetrics,
    pub mol: SpeciesMetrics,
    /// The analysis window held fewer than [`MIN_WINDOW_SAMPLES`] samples.
    pub insufficient_data: bool,
}

/// Minimum samples the analysis window must hold for a meaningful verdict.
pub const MIN_WINDOW_SAMPLES: usize = 32;

/// Peak physical densities `max |phi/x|^2` and rms radii per species.
/// A zero-norm species reports peak 0 and width 0.
pub fn peak_and_width(fields: &FieldPair, grid: &RadialGrid) -> (f64, f64, f64, f64) {
    let one = |phi: &[C64]| -> (f64, f64) {
        let mut peak = 0.0_f64;
        let mut norm = 0.0_f64;
        let mut x2_moment = 0.0_f64;
        for (&x, z) in grid.x().iter().zip(phi) {
            let p = z.norm_sqr();
            peak = peak.max(p / (x * x));
            norm += p;
            x2_moment += x * x * p;
        }
        if norm <= 0.0 {
            (0.0, 0.0)
        } else {
            (peak, sqrt(x2_moment / norm))
        }
    };
    let (peak_a, width_a) = one(&fields.phi_a);
    let (peak_m, width_m) = one(&fields.phi_m);
    (peak_a, peak_m, width_a, width_m)
}

/// Classify a run. `window_fraction` selects the final fraction of the
/// series as the analysis window (default 0.5). Degenerate inputs map to
/// labels, never to errors.
pub fn classify(
    record: &EvolutionRecord,
    window_fraction: f64,
    thresholds: &Thresholds,
) -> StabilityVerdict {
    let wf = window_fraction.clamp(f64::MIN_POSITIVE, 1.0);
    let n = record.series.len();
    let take = (libm::ceil(n as f64 * wf) as usize).clamp(1, n.max(1));
    let window = &record.series[n - take.min(n)..];

    if window.len() < MIN_WINDOW_SAMPLES {
        return StabilityVerdict {
            label_atom: Label::Unstable,
            label_mol: Label::Unstable,
            atom: SpeciesMetrics::zero(),
            mol: SpeciesMetrics::zero(),
            insufficient_data: true,
        };
    }

    let taus: Vec<f64> = window.iter().map(|s| s.tau).collect();
    let peaks_a: Vec<f64> = window.iter().map(|s| s.peak_a).collect();
    let peaks_m: Vec<f64> = window.iter().map(|s| s.peak_m).collect();
    let atom = species_metrics(&taus, &peaks_a, thresholds);
    let mol = species_metrics(&taus, &peaks_m, thresholds);

    let blew_up = record.terminated_early();
    StabilityVerdict {
        label_atom: label_for(&atom, thresholds, blew_up),
        label_mol: label_for(&mol, thresholds, blew_up),
        atom,
        mol,
        insufficient_data: false,
    }
}

/// Fraction of `trend_max` at which drift already counts as unstable.
/// Resampling a series shifts the fitted window span by up to a sample
/// spacing, so a drift sitting exactly at the threshold must classify
/// identically across 2x downsampling; the 2% band absorbs that.
const TREND_GUARD: f64 = 0.98;

fn label_for(m: &SpeciesMetrics, th: &Thresholds, terminated_early: bool) -> Label {
    let drifting = m.trend.abs() >= th.trend_max * TREND_GUARD;
    if terminated_early || m.collapsed || m.cv > th.cv_hi || drifting {
        return Label::Unstable;
    }
    if m.cv <= th.cv_lo {
        return Label::Stable;
    }
    if m.cv <= th.cv_hi && m.regularity >= th.reg_min {
        return Label::Quasistable;
    }
    Label::Unstable
}

fn species_metrics(taus: &[f64], peaks: &[f64], th: &Thresholds) -> SpeciesMetrics {
    let n = peaks.len();
    let nf = n as f64;
    let mean = peaks.iter().sum::<f64>() / nf;
    if !(mean > 0.0) {
        // Identically-zero (or non-positive) series: a flat envelope.
        return SpeciesMetrics { cv: 0.0, trend: 0.0, regularity: 1.0, collapsed: false };
    }
    let var = peaks.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>() / nf;
    let cv = sqrt(var) / mean;

    let collapsed = {
        let floor = th.floor_frac * peaks[0];
        peaks.iter().any(|&p| p < floor)
    };

    // Least-squares line over the window; drift is the fitted total change
    // relative to the fitted value at the window start.
    let t0 = taus[0];
    let span = taus[n - 1] - t0;
    let trend = if span > 0.0 {
        let tmean = taus.iter().sum::<f64>() / nf;
        let mut stt = 0.0;
        let mut stp = 0.0;
        for (&t, &p) in taus.iter().zip(peaks) {
            stt += (t - tmean) * (t - tmean);
            stp += (t - tmean) * (p - mean);
        }
        if stt > 0.0 {
            let slope = stp / stt;
            let at_start = mean + slope * (t0 - tmean);
            if at_start.abs() > 0.0 { slope * span / at_start } else { 0.0 }
        } else {
            0.0
        }
    } else {
        0.0
    };

    let regularity = periodogram_concentration(peaks, mean);

    SpeciesMetrics { cv, trend, regularity, collapsed }
}

/// Fraction of total mean-removed periodogram power held by the dominant
/// frequency bin and its immediate neighbours. A constant series counts as
/// perfectly regular.
fn periodogram_concentration(values: &[f64], mean: f64) -> f64 {
    let n = values.len();
    let half = n / 2;
    if half < 1 {
        return 1.0;
    }
    let mut power = Vec::with_capacity(half);
    for k in 1..=half {
        let w = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &v) in values.iter().enumerate() {
            let q = v - mean;
            let ang = w * j as f64;
            re += q * cos(ang);
            im += q * sin(ang);
        }
        power.push(re * re + im * im);
    }
    let total: f64 = power.iter().sum();
    if total <= 0.0 {
        return 1.0;
    }
    let kstar = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(core::cmp::Ordering::Equal))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let lo = kstar.saturating_sub(1);
    let hi = (kstar + 1).min(power.len() - 1);
    power[lo..=hi].iter().sum::<f64>() / total
}
