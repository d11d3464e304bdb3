//! Physical parameters and their reduction to dimensionless coefficients.
//!
//! Lengths scale with the oscillator length `a_ho = sqrt(hbar/(m omega))`,
//! time with `1/omega`, energies with `hbar omega`. The reduced fields obey
//! the normalization `int (|phi_a|^2 + 2 |phi_m|^2) dx = 1` (a molecule
//! counts two atoms), with the particle number `N` and the `4 pi` solid-angle
//! factor of `d^3r = 4 pi r^2 dr` absorbed into the coupling coefficients:
//!
//! ```text
//! g_a    = 4 pi N a / a_ho                 (= 4 pi hbar a N / (m omega a_ho^3))
//! chi_t  = (chi/hbar) sqrt(N / a_ho^3) / omega
//! eps_t  = eps / omega        alpha_t = alpha / omega
//! g1_t   = Gamma1 N / (a_ho^3 omega)       g2_t = Gamma2 / omega
//! ```
//!
//! Quoted rates (`eps`, `alpha`, `Gamma2`, `chi/hbar`) are interpreted as
//! angular rates, with no additional `2 pi`; this convention reproduces the
//! reference coupling value `chi = 3107.377e-7 m^(3/2) Hz` from the
//! first-principles formula to 0.05%.

use crate::error::{invalid, Result};
use core::f64::consts::PI;
use libm::sqrt;

/// Fundamental constants (SI). Fixed CODATA values by default; the explicit
/// constructor exists only so tests can pin alternative values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Bohr radius, m.
    pub bohr_radius: f64,
    /// Bohr magneton, J/T.
    pub bohr_magneton: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values.
    pub const fn codata() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            bohr_radius: 5.291_772_109_03e-11,
            bohr_magneton: 9.274_010_078_3e-24,
        }
    }

    /// Override for testing. All values must be strictly positive.
    pub fn custom(hbar: f64, bohr_radius: f64, bohr_magneton: f64) -> Result<Self> {
        if !(hbar > 0.0 && bohr_radius > 0.0 && bohr_magneton > 0.0) {
            return Err(invalid("physical constants must be strictly positive"));
        }
        Ok(Self { hbar, bohr_radius, bohr_magneton })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Raw experimental inputs in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Atomic mass, kg.
    pub mass: f64,
    /// Trap angular frequency, rad/s.
    pub omega: f64,
    /// Total particle number.
    pub n_atoms: f64,
    /// s-wave scattering length, m.
    pub scattering_length: f64,
    /// Background scattering length far from resonance, m (may be negative).
    pub a_bg: f64,
    /// Resonance width, T.
    pub delta_b: f64,
    /// Magnetic-moment difference molecule vs. free atom pair, J/T (may be
    /// negative).
    pub delta_mu: f64,
    /// Detuning, rad/s.
    pub epsilon: f64,
    /// Atomic decay rate, rad/s.
    pub alpha: f64,
    /// Induced molecular decay to the two-atom continuum, m^3 rad/s.
    pub gamma1: f64,
    /// Induced molecular decay to the bound ground state, rad/s.
    pub gamma2: f64,
    /// Physical evolution time, s.
    pub t_total: f64,
}

impl PhysicalParams {
    /// The canonical 85Rb magnetic-Feshbach-resonance parameter set:
    /// N = 17100, omega = 2 pi x 12.69 rad/s, a = 570 a0, a_bg = -450 a0,
    /// Delta B = 11 G, Delta mu = -2.23 mu_B, eps = 2e5 rad/s,
    /// alpha = 2.1739e4 rad/s, with the induced decays off.
    pub fn rb85_mfr(constants: &PhysicalConstants) -> Self {
        Self {
            mass: 1.411_256_849_0e-25,
            omega: 2.0 * PI * 12.69,
            n_atoms: 17_100.0,
            scattering_length: 570.0 * constants.bohr_radius,
            a_bg: -450.0 * constants.bohr_radius,
            delta_b: 11.0e-4,
            delta_mu: -2.23 * constants.bohr_magneton,
            epsilon: 2.0e5,
            alpha: 2.1739e4,
            gamma1: 0.0,
            gamma2: 0.0,
            t_total: 3.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(invalid("mass must be > 0"));
        }
        if !(self.omega > 0.0) {
            return Err(invalid("omega must be > 0"));
        }
        if !(self.n_atoms > 0.0) {
            return Err(invalid("n_atoms must be > 0"));
        }
        if !(self.t_total >= 0.0) {
            return Err(invalid("t_total must be >= 0"));
        }
        if self.alpha < 0.0 || self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(invalid("decay rates alpha, gamma1, gamma2 must be >= 0"));
        }
        if self.a_bg * self.delta_mu * self.delta_b < 0.0 {
            return Err(invalid(
                "a_bg * delta_mu * delta_b must be >= 0 (the chi radicand)",
            ));
        }
        Ok(())
    }
}

/// The scaled coefficients that enter the discrete working equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    /// Atom-atom contact coefficient.
    pub g_a: f64,
    /// Molecule-molecule contact coefficient.
    pub g_m: f64,
    /// Atom-molecule contact coefficient.
    pub g_am: f64,
    /// Atom-molecule conversion coupling.
    pub chi_t: f64,
    /// Molecular detuning.
    pub eps_t: f64,
    /// Atomic decay rate.
    pub alpha_t: f64,
    /// Cubic atomic-channel decay coefficient.
    pub g1_t: f64,
    /// Linear molecular decay rate.
    pub g2_t: f64,
    /// Oscillator length, m (retained for unit round-trips).
    pub a_ho: f64,
    /// Total dimensionless evolution time.
    pub tau_total: f64,
}

impl DimensionlessParams {
    /// All couplings and decays zero; the bare trapped system.
    pub fn free() -> Self {
        Self {
            g_a: 0.0,
            g_m: 0.0,
            g_am: 0.0,
            chi_t: 0.0,
            eps_t: 0.0,
            alpha_t: 0.0,
            g1_t: 0.0,
            g2_t: 0.0,
            a_ho: 1.0,
            tau_total: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_t < 0.0 || self.g1_t < 0.0 || self.g2_t < 0.0 {
            return Err(invalid("alpha_t, g1_t, g2_t must be >= 0"));
        }
        if !(self.a_ho > 0.0) {
            return Err(invalid("a_ho must be > 0"));
        }
        if !(self.tau_total >= 0.0) {
            return Err(invalid("tau_total must be >= 0"));
        }
        Ok(())
    }

    /// Params with the three decay channels switched off (ground-state form).
    pub fn without_decays(&self) -> Self {
        Self { alpha_t: 0.0, g1_t: 0.0, g2_t: 0.0, ..*self }
    }
}

/// `a_ho = sqrt(hbar / (m omega))`.
pub fn oscillator_length(constants: &PhysicalConstants, mass: f64, omega: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(invalid("oscillator_length: mass must be > 0"));
    }
    if !(omega > 0.0) {
        return Err(invalid("oscillator_length: omega must be > 0"));
    }
    Ok(sqrt(constants.hbar / (mass * omega)))
}

/// Atom-atom interaction strength `lambda = 4 pi hbar^2 a / m`, J m^3.
/// Odd in `a`: an attractive (negative) scattering length gives a negative
/// coupling.
pub fn coupling_lambda(constants: &PhysicalConstants, scattering_length: f64, mass: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(invalid("coupling_lambda: mass must be > 0"));
    }
    Ok(4.0 * PI * constants.hbar * constants.hbar * scattering_length / mass)
}

/// Atom-molecule coupling from the resonance parameters,
/// `chi/hbar = sqrt(8 pi a_bg dmu dB / m)`, expressed as an angular rate
/// times m^(3/2) so it compares directly with quoted values (hbar cancels
/// against the hbar^2 inside the square root).
///
/// `a_bg` and `delta_mu` may both be negative; only their product with
/// `delta_b` must keep the radicand nonnegative.
pub fn coupling_chi(a_bg: f64, delta_mu: f64, delta_b: f64, mass: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(invalid("coupling_chi: mass must be > 0"));
    }
    let radicand = 8.0 * PI * a_bg * delta_mu * delta_b / mass;
    if radicand < 0.0 {
        return Err(invalid(alloc::format!(
            "coupling_chi: negative radicand from sign combination \
             a_bg = {a_bg:e}, delta_mu = {delta_mu:e}, delta_b = {delta_b:e}"
        )));
    }
    Ok(sqrt(radicand))
}

/// Reduce a full physical parameter set to the dimensionless coefficients.
pub fn nondimensionalize(
    constants: &PhysicalConstants,
    p: &PhysicalParams,
) -> Result<DimensionlessParams> {
    p.validate()?;
    let a_ho = oscillator_length(constants, p.mass, p.omega)?;
    let chi_rate = coupling_chi(p.a_bg, p.delta_mu, p.delta_b, p.mass)?;
    let aho3 = a_ho * a_ho * a_ho;
    let g_a = 4.0 * PI * p.n_atoms * p.scattering_length / a_ho;
    Ok(DimensionlessParams {
        g_a,
        g_m: g_a,
        g_am: g_a,
        chi_t: chi_rate * sqrt(p.n_atoms / aho3) / p.omega,
        eps_t: p.epsilon / p.omega,
        alpha_t: p.alpha / p.omega,
        g1_t: p.gamma1 * p.n_atoms / (aho3 * p.omega),
        g2_t: p.gamma2 / p.omega,
        a_ho,
        tau_total: p.omega * p.t_total,
    })
}

/// The physical quantities recoverable from a dimensionless set given the
/// atomic mass and particle number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredPhysical {
    pub omega: f64,
    pub t_total: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Invert the scaling for the fields that admit an inverse.
pub fn rescale_to_physical(
    constants: &PhysicalConstants,
    d: &DimensionlessParams,
    mass: f64,
    n_atoms: f64,
) -> Result<RecoveredPhysical> {
    if !(mass > 0.0 && n_atoms > 0.0) {
        return Err(invalid("rescale_to_physical: mass and n_atoms must be > 0"));
    }
    d.validate()?;
    let omega = constants.hbar / (mass * d.a_ho * d.a_ho);
    let aho3 = d.a_ho * d.a_ho * d.a_ho;
    Ok(RecoveredPhysical {
        omega,
        t_total: d.tau_total / omega,
        epsilon: d.eps_t * omega,
        alpha: d.alpha_t * omega,
        gamma1: d.g1_t * aho3 * omega / n_atoms,
        gamma2: d.g2_t * omega,
    })
}
