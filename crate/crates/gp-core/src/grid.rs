//! Radial mesh and the two-component complex state.
//!
//! The mesh is uniform on `(0, x_max]` with the first point at `dx`, not 0:
//! after the `psi = phi/r` substitution every `1/x` and `1/x^2` factor stays
//! finite because `phi ~ x` near the origin and the grid never evaluates at
//! `x = 0`. The boundary values `phi(0) = phi(x_max + dx) = 0` are implicit
//! in the propagator stencil.
//!
//! All integrals use the trapezoid rule; with the implicit zero endpoints it
//! collapses to `dx * sum`, matching the O(dx^2) accuracy of the stencil.

use crate::error::{invalid, Result};
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, sqrt};

/// Uniform radial mesh in oscillator units.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nx: usize,
    dx: f64,
    x: Vec<f64>,
}

impl RadialGrid {
    /// Build a uniform grid of `nx` points with spacing `dx = x_max / nx`;
    /// points are `x_j = (j+1) dx`, so `x` runs from `dx` to `x_max`.
    pub fn new(nx: usize, x_max: f64) -> Result<Self> {
        if nx < 16 {
            return Err(invalid(alloc::format!("grid: nx = {nx} must be >= 16")));
        }
        if !(x_max > 0.0) {
            return Err(invalid("grid: x_max must be > 0"));
        }
        let dx = x_max / nx as f64;
        let x = (1..=nx).map(|j| j as f64 * dx).collect();
        Ok(Self { nx, dx, x })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.nx - 1]
    }

    /// Grid points, `x_j = (j+1) dx` for `j = 0..nx`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Trapezoid quadrature of point values with implicit zero endpoints.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        self.dx * values.sum::<f64>()
    }

    /// True when the state is vacuum at the outer wall:
    /// `|phi(x_max)|^2 < 1e-12 * peak(|phi|^2)` for both species.
    /// Callers should warn (not fail) when this is violated.
    pub fn vacuum_at_wall(&self, fields: &FieldPair) -> bool {
        let wall_ok = |phi: &[C64]| {
            let peak = phi.iter().map(|z| z.norm_sqr()).fold(0.0_f64, f64::max);
            peak == 0.0 || phi[self.nx - 1].norm_sqr() < 1e-12 * peak
        };
        wall_ok(&fields.phi_a) && wall_ok(&fields.phi_m)
    }
}

/// Complex atomic and molecular radial fields on a grid, plus the current
/// dimensionless time. A plain value type: clone freely, evolve copies.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub phi_a: Vec<C64>,
    pub phi_m: Vec<C64>,
    pub tau: f64,
}

impl FieldPair {
    pub fn zeros(nx: usize) -> Self {
        Self {
            phi_a: vec![C64::new(0.0, 0.0); nx],
            phi_m: vec![C64::new(0.0, 0.0); nx],
            tau: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phi_a
            .iter()
            .chain(self.phi_m.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Real Gaussian seed `phi(x) = A x exp(-x^2 / 2 w^2)` for both species,
/// scaled so that `int (|phi_a|^2 + 2 |phi_m|^2) dx = 1` on the grid and the
/// molecular share is `2 int |phi_m|^2 dx = mol_fraction`.
pub fn initial_gaussian(
    grid: &RadialGrid,
    width_a: f64,
    width_m: f64,
    mol_fraction: f64,
) -> Result<FieldPair> {
    if !(width_a > 0.0 && width_m > 0.0) {
        return Err(invalid("initial_gaussian: widths must be > 0"));
    }
    if !(0.0..=1.0).contains(&mol_fraction) {
        return Err(invalid(alloc::format!(
            "initial_gaussian: mol_fraction = {mol_fraction} outside [0, 1]"
        )));
    }
    let profile = |w: f64| -> Vec<C64> {
        grid.x()
            .iter()
            .map(|&x| C64::new(x * exp(-x * x / (2.0 * w * w)), 0.0))
            .collect()
    };
    let mut fields = FieldPair { phi_a: profile(width_a), phi_m: profile(width_m), tau: 0.0 };
    let (raw_a, raw_m) = norms(&fields, grid);
    let target_a = 1.0 - mol_fraction;
    let target_m = mol_fraction / 2.0;
    let scale_a = if target_a > 0.0 { sqrt(target_a / raw_a) } else { 0.0 };
    let scale_m = if target_m > 0.0 { sqrt(target_m / raw_m) } else { 0.0 };
    for z in &mut fields.phi_a {
        *z *= scale_a;
    }
    for z in &mut fields.phi_m {
        *z *= scale_m;
    }
    Ok(fields)
}

/// Radial norms `(int |phi_a|^2 dx, int |phi_m|^2 dx)`.
pub fn norms(fields: &FieldPair, grid: &RadialGrid) -> (f64, f64) {
    let n_a = grid.integrate(fields.phi_a.iter().map(|z| z.norm_sqr()));
    let n_m = grid.integrate(fields.phi_m.iter().map(|z| z.norm_sqr()));
    (n_a, n_m)
}

/// Combined norm in the molecules-count-twice convention.
pub fn combined_norm(fields: &FieldPair, grid: &RadialGrid) -> f64 {
    let (n_a, n_m) = norms(fields, grid);
    n_a + 2.0 * n_m
}

/// Rescale both species by a single factor so the combined norm is 1,
/// preserving the atomic/molecular split. Returns the factor applied.
/// A zero state is left untouched (factor 1).
pub fn renormalize_combined(fields: &mut FieldPair, grid: &RadialGrid) -> f64 {
    let total = combined_norm(fields, grid);
    if total <= 0.0 {
        return 1.0;
    }
    let s = 1.0 / sqrt(total);
    for z in fields.phi_a.iter_mut().chain(fields.phi_m.iter_mut()) {
        *z *= s;
    }
    s
}
