//! Imaginary-time relaxation to the decay-free stationary state.
//!
//! The initial waves come from the time-independent coupled equations with
//! all decay channels off. Rather than a self-consistent eigensolve, the
//! same Crank-Nicolson kernel runs with `tau -> -i tau`, which damps excited
//! components; the combined norm is restored after every few steps by one
//! shared factor so the conversion coupling, not the normalizer, decides the
//! atom/molecule split. Convergence is judged on the chemical potentials.

use crate::error::{invalid, GpError, Result};
use crate::grid::{norms, renormalize_combined, FieldPair, RadialGrid};
use crate::propagator::{Propagator, StepSettings};
use crate::units::DimensionlessParams;
use crate::C64;
use libm::{atan2, cos, sin};

/// Controls for the imaginary-time relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSettings {
    /// Imaginary-time step.
    pub dtau_imag: f64,
    /// Iteration cap; hitting it yields `converged = false`, not an error.
    pub max_iters: usize,
    /// Chemical-potential convergence tolerance.
    pub mu_tol: f64,
    /// Steps between renormalizations (and convergence checks).
    pub renorm_every: usize,
}

impl Default for RelaxationSettings {
    fn default() -> Self {
        Self { dtau_imag: 1e-4, max_iters: 2_000_000, mu_tol: 1e-9, renorm_every: 1 }
    }
}

impl RelaxationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau_imag > 0.0) {
            return Err(invalid("relaxation: dtau_imag must be > 0"));
        }
        if self.max_iters < 1 {
            return Err(invalid("relaxation: max_iters must be >= 1"));
        }
        if !(self.mu_tol > 0.0) {
            return Err(invalid("relaxation: mu_tol must be > 0"));
        }
        if self.renorm_every < 1 {
            return Err(invalid("relaxation: renorm_every must be >= 1"));
        }
        Ok(())
    }
}

/// Outcome of a relaxation run. `mu_a`/`mu_m` are `None` for a species with
/// no population.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub fields: FieldPair,
    pub mu_a: Option<f64>,
    pub mu_m: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Relax `seed` under the decay-free equations (`alpha_t`, `g1_t`, `g2_t`
/// are forced to zero regardless of input). Stops when both chemical
/// potentials move by less than `mu_tol` between consecutive checks, or at
/// `max_iters`. Non-finite fields abort with [`GpError::Diverged`].
pub fn relax(
    params: &DimensionlessParams,
    grid: &RadialGrid,
    seed: &FieldPair,
    settings: &RelaxationSettings,
) -> Result<GroundStateResult> {
    settings.validate()?;
    let p = params.without_decays();
    let mut fields = seed.clone();
    fields.tau = 0.0;
    let (s_a, s_m) = norms(&fields, grid);
    if s_a + s_m <= 0.0 {
        return Err(invalid("relax: seed state must be nonzero"));
    }
    renormalize_combined(&mut fields, grid);

    let step_settings = StepSettings {
        dtau: settings.dtau_imag,
        blowup_threshold: f64::INFINITY,
        ..StepSettings::default()
    };
    let mut prop = Propagator::new(&p, grid, step_settings)?;

    // mu is not monotone along the renormalized flow, so a single small
    // change can be a transient extremum; convergence requires the
    // tolerance to hold on several consecutive checks.
    const SETTLED_CHECKS: usize = 4;
    let mut mu_prev = chemical_potential(&fields, &p, grid);
    let mut iterations = 0;
    let mut converged = false;
    let mut settled = 0;
    for it in 1..=settings.max_iters {
        prop.imaginary_step(&mut fields, settings.dtau_imag)
            .map_err(|_| GpError::Diverged { iteration: it })?;
        if !fields.is_finite() {
            return Err(GpError::Diverged { iteration: it });
        }
        iterations = it;
        if it % settings.renorm_every == 0 {
            renormalize_combined(&mut fields, grid);
            let mu = chemical_potential(&fields, &p, grid);
            if it > settings.renorm_every
                && mu_delta(mu.0, mu_prev.0) < settings.mu_tol
                && mu_delta(mu.1, mu_prev.1) < settings.mu_tol
            {
                settled += 1;
                if settled >= SETTLED_CHECKS {
                    converged = true;
                    break;
                }
            } else {
                settled = 0;
            }
            mu_prev = mu;
        }
    }

    renormalize_combined(&mut fields, grid);
    remove_global_phase(&mut fields);
    fields.tau = 0.0;
    let (mu_a, mu_m) = chemical_potential(&fields, &p, grid);
    Ok(GroundStateResult { fields, mu_a, mu_m, iterations, converged })
}

fn mu_delta(now: Option<f64>, before: Option<f64>) -> f64 {
    match (now, before) {
        (Some(a), Some(b)) => (a - b).abs(),
        (None, None) => 0.0,
        // A species appeared or vanished between checks.
        _ => f64::INFINITY,
    }
}

/// Chemical potentials `<phi| H |phi> / <phi|phi>` per species, with the
/// mean-field and conversion terms evaluated at the current fields and the
/// decay terms excluded. A zero-norm species reports `None`.
pub fn chemical_potential(
    fields: &FieldPair,
    params: &DimensionlessParams,
    grid: &RadialGrid,
) -> (Option<f64>, Option<f64>) {
    let nx = grid.nx();
    let dx2 = grid.dx() * grid.dx();
    let x = grid.x();
    let (n_a, n_m) = norms(fields, grid);

    let lap = |phi: &[C64], j: usize| -> C64 {
        let left = if j > 0 { phi[j - 1] } else { C64::new(0.0, 0.0) };
        let right = if j + 1 < nx { phi[j + 1] } else { C64::new(0.0, 0.0) };
        (left - phi[j] * 2.0 + right) / dx2
    };

    let mut ha = 0.0;
    let mut hm = 0.0;
    for j in 0..nx {
        let xj = x[j];
        let ix2 = 1.0 / (xj * xj);
        let da = fields.phi_a[j].norm_sqr() * ix2;
        let dm = fields.phi_m[j].norm_sqr() * ix2;

        let h_a = -0.5 * lap(&fields.phi_a, j)
            + fields.phi_a[j] * (0.5 * xj * xj + params.g_a * da + params.g_am * dm)
            + fields.phi_m[j] * fields.phi_a[j].conj() * (params.chi_t / xj);
        ha += (fields.phi_a[j].conj() * h_a).re;

        let h_m = -0.25 * lap(&fields.phi_m, j)
            + fields.phi_m[j] * (xj * xj + params.eps_t + params.g_m * dm + params.g_am * da)
            + fields.phi_a[j] * fields.phi_a[j] * (0.5 * params.chi_t / xj);
        hm += (fields.phi_m[j].conj() * h_m).re;
    }
    let dx = grid.dx();
    let mu_a = if n_a > 1e-12 { Some(ha * dx / n_a) } else { None };
    let mu_m = if n_m > 1e-12 { Some(hm * dx / n_m) } else { None };
    (mu_a, mu_m)
}

/// Total energy functional of the decay-free equations. Decreases
/// monotonically along the renormalized imaginary-time flow.
pub fn energy_functional(
    fields: &FieldPair,
    params: &DimensionlessParams,
    grid: &RadialGrid,
) -> f64 {
    let nx = grid.nx();
    let dx = grid.dx();
    let x = grid.x();
    let zero = C64::new(0.0, 0.0);

    // Kinetic part via edge differences; with the Dirichlet walls this is
    // exactly <phi| -k d^2 |phi> for the three-point stencil.
    let mut kin = 0.0;
    for j in 0..=nx {
        let a_lo = if j > 0 { fields.phi_a[j - 1] } else { zero };
        let a_hi = if j < nx { fields.phi_a[j] } else { zero };
        let m_lo = if j > 0 { fields.phi_m[j - 1] } else { zero };
        let m_hi = if j < nx { fields.phi_m[j] } else { zero };
        kin += 0.5 * (a_hi - a_lo).norm_sqr() + 0.25 * (m_hi - m_lo).norm_sqr();
    }
    kin /= dx * dx;

    let mut pot = 0.0;
    for j in 0..nx {
        let xj = x[j];
        let ix2 = 1.0 / (xj * xj);
        let pa = fields.phi_a[j].norm_sqr();
        let pm = fields.phi_m[j].norm_sqr();
        let da = pa * ix2;
        let dm = pm * ix2;
        pot += 0.5 * xj * xj * pa
            + (xj * xj + params.eps_t) * pm
            + 0.5 * params.g_a * da * pa
            + 0.5 * params.g_m * dm * pm
            + params.g_am * da * pm
            + params.chi_t * (fields.phi_a[j].conj() * fields.phi_a[j].conj() * fields.phi_m[j]).re
                / xj;
    }
    (kin + pot) * dx
}

/// Rotate out the family's global gauge `(theta, 2 theta)` so the
/// peak-amplitude point of the atomic field is real and positive (falling
/// back to the molecular field when there are no atoms). Real inputs stay
/// exactly real.
fn remove_global_phase(fields: &mut FieldPair) {
    let peak_of = |phi: &[C64]| -> Option<usize> {
        let mut best = None;
        let mut best_mag = 0.0;
        for (j, z) in phi.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best_mag {
                best_mag = m;
                best = Some(j);
            }
        }
        best
    };

    if let Some(j) = peak_of(&fields.phi_a) {
        let z = fields.phi_a[j];
        if z.im == 0.0 {
            // Real field: the gauge is a sign flip of the atomic component
            // only (theta = pi leaves the molecular field unchanged).
            if z.re < 0.0 {
                for w in &mut fields.phi_a {
                    *w = -*w;
                }
            }
        } else {
            let theta = -atan2(z.im, z.re);
            let ra = C64::new(cos(theta), sin(theta));
            let rm = C64::new(cos(2.0 * theta), sin(2.0 * theta));
            for w in &mut fields.phi_a {
                *w *= ra;
            }
            for w in &mut fields.phi_m {
                *w *= rm;
            }
        }
    } else if let Some(j) = peak_of(&fields.phi_m) {
        let z = fields.phi_m[j];
        if z.im == 0.0 {
            if z.re < 0.0 {
                for w in &mut fields.phi_m {
                    *w = -*w;
                }
            }
        } else {
            let theta = -atan2(z.im, z.re);
            let r = C64::new(cos(theta), sin(theta));
            for w in &mut fields.phi_m {
                *w *= r;
            }
        }
    }
}
