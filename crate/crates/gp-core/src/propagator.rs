//! Semi-implicit Crank-Nicolson propagation of the coupled dissipative
//! equations in radial form.
//!
//! Working equations on the reduced fields (`x` in oscillator lengths, `tau`
//! in inverse trap frequencies):
//!
//! ```text
//! i d(phi_a)/dtau = [-1/2 d^2/dx^2 + x^2/2
//!                    + (g_a |phi_a|^2 + g_am |phi_m|^2)/x^2
//!                    - i (alpha_t + g1_t |phi_a|^2 / x^2)] phi_a
//!                    + chi_t phi_m conj(phi_a) / x
//! i d(phi_m)/dtau = [-1/4 d^2/dx^2 + x^2 + eps_t
//!                    + (g_m |phi_m|^2 + g_am |phi_a|^2)/x^2
//!                    - i g2_t] phi_m
//!                    + (chi_t/2) phi_a^2 / x
//! ```
//!
//! One step solves, per species, the tridiagonal system
//! `(I + z/2 H) phi' = (I - z/2 H) phi - z S` with `z = i dtau` (real time)
//! or `z = dtau` (imaginary time). The kinetic and trap parts of `H` are
//! constant; the density-dependent potentials and the conversion sources `S`
//! are evaluated at the half step through `fp_iters` fixed-point passes:
//! pass 1 uses the old-time fields, pass k the average of old and newest
//! iterate. The conversion terms are antilinear in the fields and therefore
//! stay out of the matrices, which keeps every solve species-diagonal and
//! tridiagonal. With the fixed point iterated to convergence the step
//! conserves `n_a + 2 n_m` exactly when all decays vanish.

use crate::error::{invalid, GpError, Result};
use crate::grid::{norms, FieldPair, RadialGrid};
use crate::stability::{peak_and_width, EvolutionRecord, SeriesSample, Snapshot, Termination};
use crate::tridiag::solve_in_place;
use crate::units::DimensionlessParams;
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSettings {
    /// Time step in trap units.
    pub dtau: f64,
    /// Fixed-point passes per step for the density-dependent and conversion
    /// terms. Two preserves second order; stiff couplings want more.
    pub fp_iters: usize,
    /// Steps between full profile snapshots (`None` = no snapshots).
    pub snapshot_stride: Option<usize>,
    /// Steps between scalar-observable samples.
    pub series_stride: usize,
    /// Any field magnitude above this ends the run as a blow-up.
    pub blowup_threshold: f64,
}

impl Default for StepSettings {
    fn default() -> Self {
        Self {
            dtau: 2.5e-4,
            fp_iters: 2,
            snapshot_stride: None,
            series_stride: 1,
            blowup_threshold: 1e6,
        }
    }
}

impl StepSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0) {
            return Err(invalid("stepping: dtau must be > 0"));
        }
        if self.fp_iters < 1 {
            return Err(invalid("stepping: fp_iters must be >= 1"));
        }
        if self.series_stride < 1 {
            return Err(invalid("stepping: series_stride must be >= 1"));
        }
        if self.snapshot_stride == Some(0) {
            return Err(invalid("stepping: snapshot_stride must be >= 1"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(invalid("stepping: blowup_threshold must be > 0"));
        }
        Ok(())
    }
}

/// Atomic kinetic coefficient (hbar^2/2m in trap units).
const K_ATOM: f64 = 0.5;
/// Molecular kinetic coefficient (mass 2m).
const K_MOL: f64 = 0.25;

/// Crank-Nicolson stepper with preallocated workspace. One instance drives
/// one evolution; distinct instances share nothing.
pub struct Propagator {
    params: DimensionlessParams,
    grid: RadialGrid,
    settings: StepSettings,
    inv_x: Vec<f64>,
    inv_x2: Vec<f64>,
    /// Constant diagonal of H per species: 2k/dx^2 + trap (+ detuning).
    stat_a: Vec<f64>,
    stat_m: Vec<f64>,
    /// Off-diagonal of H per species: -k/dx^2.
    hoff_a: f64,
    hoff_m: f64,
    half_a: Vec<C64>,
    half_m: Vec<C64>,
    new_a: Vec<C64>,
    new_m: Vec<C64>,
    dens_a: Vec<f64>,
    dens_m: Vec<f64>,
    lower: Vec<C64>,
    upper: Vec<C64>,
    diag: Vec<C64>,
    rhs: Vec<C64>,
    scratch: Vec<C64>,
}

impl Propagator {
    pub fn new(
        params: &DimensionlessParams,
        grid: &RadialGrid,
        settings: StepSettings,
    ) -> Result<Self> {
        params.validate()?;
        settings.validate()?;
        let nx = grid.nx();
        let dx2 = grid.dx() * grid.dx();
        let inv_x: Vec<f64> = grid.x().iter().map(|&x| 1.0 / x).collect();
        let inv_x2: Vec<f64> = grid.x().iter().map(|&x| 1.0 / (x * x)).collect();
        let stat_a = grid
            .x()
            .iter()
            .map(|&x| 2.0 * K_ATOM / dx2 + 0.5 * x * x)
            .collect();
        let stat_m = grid
            .x()
            .iter()
            .map(|&x| 2.0 * K_MOL / dx2 + x * x + params.eps_t)
            .collect();
        let zero = C64::new(0.0, 0.0);
        Ok(Self {
            params: *params,
            grid: grid.clone(),
            settings,
            inv_x,
            inv_x2,
            stat_a,
            stat_m,
            hoff_a: -K_ATOM / dx2,
            hoff_m: -K_MOL / dx2,
            half_a: vec![zero; nx],
            half_m: vec![zero; nx],
            new_a: vec![zero; nx],
            new_m: vec![zero; nx],
            dens_a: vec![0.0; nx],
            dens_m: vec![0.0; nx],
            lower: vec![zero; nx - 1],
            upper: vec![zero; nx - 1],
            diag: vec![zero; nx],
            rhs: vec![zero; nx],
            scratch: vec![zero; nx],
        })
    }

    pub fn settings(&self) -> &StepSettings {
        &self.settings
    }

    /// One real-time step of the configured `dtau`.
    pub fn step(&mut self, fields: &mut FieldPair) -> Result<()> {
        let dt = self.settings.dtau;
        self.step_dt(fields, dt, false)
    }

    /// One imaginary-time step (`tau -> -i tau`); damps excited components.
    /// The caller owns renormalization and leaves `tau` untouched.
    pub fn imaginary_step(&mut self, fields: &mut FieldPair, dt: f64) -> Result<()> {
        self.step_dt(fields, dt, true)
    }

    fn step_dt(&mut self, fields: &mut FieldPair, dt: f64, imaginary: bool) -> Result<()> {
        let nx = self.grid.nx();
        debug_assert_eq!(fields.phi_a.len(), nx);
        debug_assert_eq!(fields.phi_m.len(), nx);
        let z = if imaginary { C64::new(dt, 0.0) } else { C64::new(0.0, dt) };
        let z2 = z * 0.5;

        self.half_a.copy_from_slice(&fields.phi_a);
        self.half_m.copy_from_slice(&fields.phi_m);

        let p = self.params;
        for _pass in 0..self.settings.fp_iters {
            for j in 0..nx {
                self.dens_a[j] = self.half_a[j].norm_sqr() * self.inv_x2[j];
                self.dens_m[j] = self.half_m[j].norm_sqr() * self.inv_x2[j];
            }

            // Atomic solve.
            self.assemble_and_solve(
                &fields.phi_a,
                z,
                z2,
                self.hoff_a,
                Species::Atom,
                p,
            )?;
            core::mem::swap(&mut self.new_a, &mut self.rhs);

            // Molecular solve reuses the same half-step densities.
            self.assemble_and_solve(
                &fields.phi_m,
                z,
                z2,
                self.hoff_m,
                Species::Molecule,
                p,
            )?;
            core::mem::swap(&mut self.new_m, &mut self.rhs);

            for j in 0..nx {
                self.half_a[j] = (fields.phi_a[j] + self.new_a[j]) * 0.5;
                self.half_m[j] = (fields.phi_m[j] + self.new_m[j]) * 0.5;
            }
        }

        if !imaginary {
            let thr2 = self.settings.blowup_threshold * self.settings.blowup_threshold;
            let tau_next = fields.tau + dt;
            for j in 0..nx {
                let ma = self.new_a[j].norm_sqr();
                let mm = self.new_m[j].norm_sqr();
                if !(ma.is_finite() && mm.is_finite()) || ma > thr2 || mm > thr2 {
                    return Err(GpError::BlowUp { tau: tau_next, grid_index: j });
                }
            }
            fields.tau = tau_next;
        }
        fields.phi_a.copy_from_slice(&self.new_a);
        fields.phi_m.copy_from_slice(&self.new_m);
        Ok(())
    }

    /// Build diagonal + right-hand side for one species and solve; the
    /// solution lands in `self.rhs`.
    fn assemble_and_solve(
        &mut self,
        old: &[C64],
        z: C64,
        z2: C64,
        hoff: f64,
        species: Species,
        p: DimensionlessParams,
    ) -> Result<()> {
        let nx = old.len();
        let off = z2 * hoff;
        for e in self.lower.iter_mut() {
            *e = off;
        }
        for e in self.upper.iter_mut() {
            *e = off;
        }
        for j in 0..nx {
            let (hdiag, source) = match species {
                Species::Atom => {
                    let v_re = self.stat_a[j] + p.g_a * self.dens_a[j] + p.g_am * self.dens_m[j];
                    let v_im = -(p.alpha_t + p.g1_t * self.dens_a[j]);
                    let s = self.half_m[j] * self.half_a[j].conj() * (p.chi_t * self.inv_x[j]);
                    (C64::new(v_re, v_im), s)
                }
                Species::Molecule => {
                    let v_re = self.stat_m[j] + p.g_m * self.dens_m[j] + p.g_am * self.dens_a[j];
                    let v_im = -p.g2_t;
                    let s = self.half_a[j] * self.half_a[j] * (0.5 * p.chi_t * self.inv_x[j]);
                    (C64::new(v_re, v_im), s)
                }
            };
            self.diag[j] = C64::new(1.0, 0.0) + z2 * hdiag;
            // (I - z/2 H) old - z S, with implicit zero boundary values.
            let mut r = (C64::new(1.0, 0.0) - z2 * hdiag) * old[j];
            if j > 0 {
                r -= off * old[j - 1];
            }
            if j + 1 < nx {
                r -= off * old[j + 1];
            }
            self.rhs[j] = r - z * source;
        }
        solve_in_place(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch)
    }

    /// Advance to `tau_end`, sampling scalar observables every
    /// `series_stride` steps and profiles every `snapshot_stride` steps. The
    /// last step is shortened to land exactly on `tau_end`. A blow-up ends
    /// the run early; the partial record carries the reason and is a
    /// legitimate "unstable/diverged" outcome for the classifier.
    pub fn evolve(
        &mut self,
        fields: &mut FieldPair,
        tau_end: f64,
        mut observer: impl FnMut(&SeriesSample),
    ) -> EvolutionRecord {
        let mut record = EvolutionRecord {
            series: Vec::new(),
            snapshots: Vec::new(),
            terminated: Termination::Completed,
        };
        let s0 = self.sample(fields);
        observer(&s0);
        record.series.push(s0);

        let tol = 1e-12 * tau_end.abs().max(1.0);
        let mut step_idx: usize = 0;
        while tau_end - fields.tau > tol {
            let dt = self.settings.dtau.min(tau_end - fields.tau);
            match self.step_dt(fields, dt, false) {
                Ok(()) => {}
                Err(GpError::BlowUp { tau, grid_index }) => {
                    record.terminated = Termination::BlowUp { tau, grid_index };
                    break;
                }
                Err(GpError::SingularSystem { row }) => {
                    // A lost pivot is numerical failure of the same kind.
                    record.terminated = Termination::BlowUp { tau: fields.tau, grid_index: row };
                    break;
                }
                Err(_) => unreachable!("step emits only blow-up or singular-system errors"),
            }
            step_idx += 1;
            let at_end = tau_end - fields.tau <= tol;
            if step_idx % self.settings.series_stride == 0 || at_end {
                let s = self.sample(fields);
                observer(&s);
                record.series.push(s);
            }
            if let Some(stride) = self.settings.snapshot_stride {
                if step_idx % stride == 0 || at_end {
                    record.snapshots.push(Snapshot {
                        tau: fields.tau,
                        phi_a: fields.phi_a.clone(),
                        phi_m: fields.phi_m.clone(),
                    });
                }
            }
        }
        record
    }

    fn sample(&self, fields: &FieldPair) -> SeriesSample {
        let (n_a, n_m) = norms(fields, &self.grid);
        let (peak_a, peak_m, width_a, width_m) = peak_and_width(fields, &self.grid);
        SeriesSample { tau: fields.tau, n_a, n_m, peak_a, peak_m, width_a, width_m }
    }
}

#[derive(Clone, Copy)]
enum Species {
    Atom,
    Molecule,
}
