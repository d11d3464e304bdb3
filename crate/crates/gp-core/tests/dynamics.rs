//! Cross-module invariants: the ground-state/propagator bridge, symmetry
//! checks, and the published-preset behaviors that are well-posed.

use gp_core::grid::{combined_norm, initial_gaussian, norms, renormalize_combined, RadialGrid};
use gp_core::ground::relax;
use gp_core::propagator::{Propagator, StepSettings};
use gp_core::units::{nondimensionalize, PhysicalConstants, PhysicalParams};
use gp_core::{DimensionlessParams, FieldPair, RelaxationSettings};

fn density(phi: &[gp_core::C64]) -> Vec<f64> {
    phi.iter().map(|z| z.norm_sqr()).collect()
}

fn rel_inf_diff(a: &[f64], b: &[f64]) -> f64 {
    let peak = a.iter().cloned().fold(0.0, f64::max).max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / peak
}

/// One real-time CN step applied to a relaxed state moves the density by
/// less than 1e-6 in relative infinity norm (the ground_state/propagator
/// bridge).
#[test]
fn relaxed_state_is_a_propagator_fixed_point() {
    let grid = RadialGrid::new(512, 14.0).unwrap();
    let params = DimensionlessParams {
        g_a: 2.0,
        g_m: 2.0,
        g_am: 2.0,
        chi_t: 3.0,
        eps_t: 2.0,
        ..DimensionlessParams::free()
    };
    let seed = initial_gaussian(&grid, 1.2, 1.0, 0.3).unwrap();
    let settings = RelaxationSettings {
        dtau_imag: 1e-3,
        max_iters: 400_000,
        mu_tol: 1e-12,
        renorm_every: 1,
    };
    let res = relax(&params, &grid, &seed, &settings).unwrap();
    assert!(res.converged);

    let mut prop =
        Propagator::new(&params, &grid, StepSettings::default()).unwrap();
    let mut f = res.fields.clone();
    let d0 = density(&f.phi_a);
    let m0 = density(&f.phi_m);
    prop.step(&mut f).unwrap();
    assert!(rel_inf_diff(&density(&f.phi_a), &d0) < 1e-6);
    assert!(rel_inf_diff(&density(&f.phi_m), &m0) < 1e-6);
}

/// Real stationary data with decays, coupling and contact terms off picks
/// up no momentum: <p> = Im int conj(phi) dphi/dx dx stays at roundoff
/// level. (The linear problem is the clean probe: imaginary- and real-time
/// Crank-Nicolson share exact eigenvectors there, while an interacting
/// relaxed state carries an O(dtau_imag) stationarity bias that breathes
/// legitimately.)
#[test]
fn no_spurious_momentum_drift() {
    let grid = RadialGrid::new(512, 14.0).unwrap();
    let params = DimensionlessParams::free();
    let seed = initial_gaussian(&grid, 1.3, 1.0, 0.0).unwrap();
    // The chemical potential is quadratic in the excited-state residue, so
    // a mu-based stop cannot certify the ~1e-10 purity this check needs;
    // run a fixed budget that takes the residue to the roundoff floor.
    let settings = RelaxationSettings {
        dtau_imag: 5e-3,
        max_iters: 4_000,
        mu_tol: 1e-16,
        renorm_every: 1,
    };
    let res = relax(&params, &grid, &seed, &settings).unwrap();
    assert!((res.mu_a.unwrap() - 1.5).abs() < 1e-3);

    let momentum = |f: &FieldPair| -> f64 {
        let dx = grid.dx();
        let nx = grid.nx();
        let mut p = 0.0;
        for j in 0..nx {
            let left = if j > 0 { f.phi_a[j - 1] } else { gp_core::C64::new(0.0, 0.0) };
            let right = if j + 1 < nx { f.phi_a[j + 1] } else { gp_core::C64::new(0.0, 0.0) };
            let grad = (right - left) / (2.0 * dx);
            p += (f.phi_a[j].conj() * grad).im;
        }
        p * dx
    };

    let mut prop = Propagator::new(&params, &grid, StepSettings::default()).unwrap();
    let mut f = res.fields.clone();
    assert!(momentum(&f).abs() < 1e-12);
    for _ in 0..2000 {
        prop.step(&mut f).unwrap();
    }
    assert!(momentum(&f).abs() < 1e-10, "momentum {}", momentum(&f));
}

/// Different seeds fall into the same relaxed state on a well-posed coupled
/// configuration. (The 85Rb set is excluded deliberately: its conversion
/// coupling in trap units is ~1e5, the coupled functional has no resolvable
/// minimizer at that strength, and relaxation parks on seed- and
/// step-dependent states.)
#[test]
fn seed_independence_on_resolvable_config() {
    let grid = RadialGrid::new(384, 14.0).unwrap();
    let params = DimensionlessParams {
        g_a: 5.0,
        g_m: 5.0,
        g_am: 5.0,
        chi_t: 4.0,
        eps_t: 3.0,
        ..DimensionlessParams::free()
    };
    let settings = RelaxationSettings {
        dtau_imag: 1e-3,
        max_iters: 600_000,
        mu_tol: 1e-13,
        renorm_every: 1,
    };
    let seed_lo = initial_gaussian(&grid, 1.0, 1.0, 0.1).unwrap();
    let seed_hi = initial_gaussian(&grid, 1.3, 0.8, 0.9).unwrap();
    let a = relax(&params, &grid, &seed_lo, &settings).unwrap();
    let b = relax(&params, &grid, &seed_hi, &settings).unwrap();
    assert!(a.converged && b.converged);
    assert!(rel_inf_diff(&density(&a.fields.phi_a), &density(&b.fields.phi_a)) < 1e-4);
    assert!(rel_inf_diff(&density(&a.fields.phi_m), &density(&b.fields.phi_m)) < 1e-4);
}

/// The published-preset relaxation self-focuses: the converged peak atomic
/// density exceeds the noninteracting one.
#[test]
fn rb85_preset_relaxation_self_focuses() {
    let c = PhysicalConstants::codata();
    let p = PhysicalParams::rb85_mfr(&c);
    let full = nondimensionalize(&c, &p).unwrap();
    let grid = RadialGrid::new(512, 14.0).unwrap();
    let seed = initial_gaussian(&grid, 1.0, 1.0, 0.1).unwrap();
    let settings = RelaxationSettings {
        dtau_imag: 1e-5,
        max_iters: 100_000,
        mu_tol: 1e-9,
        renorm_every: 1,
    };
    let coupled = relax(&full, &grid, &seed, &settings).unwrap();
    assert!(coupled.converged);

    let bare = relax(
        &DimensionlessParams::free(),
        &grid,
        &seed,
        &RelaxationSettings { dtau_imag: 5e-3, max_iters: 40_000, mu_tol: 1e-12, renorm_every: 1 },
    )
    .unwrap();
    let peak = |f: &FieldPair| {
        let (pa, _, _, _) = gp_core::stability::peak_and_width(f, &grid);
        pa
    };
    assert!(
        peak(&coupled.fields) > peak(&bare.fields),
        "coupled peak {} vs bare peak {}",
        peak(&coupled.fields),
        peak(&bare.fields)
    );
}

/// Decay-free coherent exchange: starting from a pure atomic cloud, the two
/// norms oscillate out of phase (their mean-removed cross-correlation is
/// negative) while n_a + 2 n_m stays conserved.
#[test]
fn exchange_oscillation_is_out_of_phase() {
    let grid = RadialGrid::new(384, 14.0).unwrap();
    let params = DimensionlessParams {
        g_a: 2.0,
        g_m: 2.0,
        g_am: 2.0,
        chi_t: 4.0,
        eps_t: 2.0,
        ..DimensionlessParams::free()
    };
    let settings = StepSettings { dtau: 5e-4, fp_iters: 6, series_stride: 5, ..Default::default() };
    let mut prop = Propagator::new(&params, &grid, settings).unwrap();
    let mut f = initial_gaussian(&grid, 1.0, 1.0, 0.0).unwrap();
    let c0 = combined_norm(&f, &grid);
    let rec = prop.evolve(&mut f, 5.0, |_| {});
    assert!(!rec.terminated_early());

    let na: Vec<f64> = rec.series.iter().map(|s| s.n_a).collect();
    let nm: Vec<f64> = rec.series.iter().map(|s| s.n_m).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mm) = (mean(&na), mean(&nm));
    let corr: f64 = na.iter().zip(&nm).map(|(a, m)| (a - ma) * (m - mm)).sum();
    assert!(corr < 0.0, "correlation sum {corr}");
    assert!(nm.iter().cloned().fold(0.0, f64::max) > 1e-4, "molecules never formed");
    for s in &rec.series {
        assert!((s.n_a + 2.0 * s.n_m - c0).abs() < 1e-8);
    }
}

/// Renormalization restores the combined norm exactly.
#[test]
fn renormalization_restores_combined_norm() {
    let grid = RadialGrid::new(256, 12.0).unwrap();
    let mut f = initial_gaussian(&grid, 1.4, 0.7, 0.35).unwrap();
    for z in &mut f.phi_a {
        *z *= 1.7;
    }
    for z in &mut f.phi_m {
        *z *= 0.3;
    }
    let (n_a0, n_m0) = norms(&f, &grid);
    renormalize_combined(&mut f, &grid);
    assert!((combined_norm(&f, &grid) - 1.0).abs() < 1e-12);
    // Split preserved: both species scaled by the same factor.
    let (n_a1, n_m1) = norms(&f, &grid);
    assert!((n_a1 / n_m1 - n_a0 / n_m0).abs() < 1e-10);
}
