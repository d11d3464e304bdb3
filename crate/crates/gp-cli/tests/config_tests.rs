//! Config-file semantics: preset expansion, override precedence, rejection
//! of bad values.

use gp_cli::config::{RunConfig, SweepMode};
use gp_cli::CliError;

#[test]
fn preset_expands_to_published_parameter_set() {
    let cfg = RunConfig::parse("[physical]\npreset = rb85-mfr\n").unwrap();
    let p = cfg.physical.expect("physical route");
    assert_eq!(p.n_atoms, 17100.0);
    assert_eq!(p.mass, 1.4112568490e-25);
    assert!((p.omega - 2.0 * std::f64::consts::PI * 12.69).abs() < 1e-12);
    assert!((p.scattering_length - 570.0 * 5.29177210903e-11).abs() < 1e-22);
    assert!((p.a_bg + 450.0 * 5.29177210903e-11).abs() < 1e-22);
    assert_eq!(p.delta_b, 11.0e-4);
    assert!((p.delta_mu + 2.23 * 9.2740100783e-24).abs() < 1e-35);
    assert_eq!(p.epsilon, 2.0e5);
    assert_eq!(p.alpha, 2.1739e4);
    assert_eq!(p.gamma1, 0.0);
    assert_eq!(p.gamma2, 0.0);
    // Derived coefficients come out of the same reduction the unit tests pin.
    assert!((cfg.dimensionless.g_a - 2117.2281479506464).abs() < 1e-8);
    assert!((cfg.dimensionless.chi_t - 95102.38024641175).abs() < 1e-6);
    // Desk-scale horizon by default; --full restores 3.75 s.
    assert!((cfg.dimensionless.tau_total - 60.0).abs() < 1e-9);
}

#[test]
fn preset_fields_can_be_overridden() {
    let cfg = RunConfig::parse(
        "[physical]\npreset = rb85-mfr\ngamma1 = 1.629e-13\ngamma2 = 304.4e12\nt_total = 3.75\n",
    )
    .unwrap();
    let p = cfg.physical.unwrap();
    assert_eq!(p.gamma1, 1.629e-13);
    assert_eq!(p.gamma2, 304.4e12);
    assert!(cfg.dimensionless.g1_t > 1e5, "g1_t = {}", cfg.dimensionless.g1_t);
    assert!((cfg.dimensionless.tau_total - 299.0).abs() < 0.1);
}

#[test]
fn dimensionless_override_wins_and_is_logged() {
    let cfg = RunConfig::parse(
        "[physical]\npreset = rb85-mfr\ngamma1 = 1.629e-13\n\n[dimensionless]\ng1_t = 0.5\n",
    )
    .unwrap();
    assert_eq!(cfg.dimensionless.g1_t, 0.5);
    assert!(
        cfg.provenance.iter().any(|l| l.contains("g1_t") && l.contains("overrides")),
        "provenance: {:?}",
        cfg.provenance
    );
}

#[test]
fn pure_dimensionless_mode_defaults() {
    let cfg = RunConfig::parse("[dimensionless]\ng_a = -2\nchi_t = 5\neps_t = 5\n").unwrap();
    assert!(cfg.physical.is_none());
    assert_eq!(cfg.dimensionless.g_a, -2.0);
    // One contact coefficient unless split explicitly.
    assert_eq!(cfg.dimensionless.g_m, -2.0);
    assert_eq!(cfg.dimensionless.g_am, -2.0);
    // Desk-scale horizon default.
    assert_eq!(cfg.dimensionless.tau_total, 60.0);
    assert_eq!(cfg.grid_nx, 2048);
    assert_eq!(cfg.grid_x_max, 20.0);
}

#[test]
fn negative_decay_rejected() {
    for text in [
        "[physical]\npreset = rb85-mfr\ngamma2 = -1\n",
        "[dimensionless]\ng2_t = -0.5\n",
        "[dimensionless]\ng1_t = -1e-3\n",
    ] {
        match RunConfig::parse(text) {
            Err(CliError::Config(_)) => {}
            other => panic!("expected config error for {text:?}, got {other:?}"),
        }
    }
}

#[test]
fn unknown_keys_and_sections_name_the_field() {
    let err = RunConfig::parse("[grid]\nnx = 64\nnq = 3\n").unwrap_err();
    assert!(err.to_string().contains("grid.nq"), "{err}");
    let err = RunConfig::parse("[gird]\nnx = 64\n").unwrap_err();
    assert!(err.to_string().contains("gird"), "{err}");
    let err = RunConfig::parse("[stepping]\ndtau = zero\n").unwrap_err();
    assert!(err.to_string().contains("stepping.dtau"), "{err}");
}

#[test]
fn sweep_section_parses_lists_and_mode() {
    let cfg = RunConfig::parse(
        "[dimensionless]\ng_a = 1\n\n[sweep]\nmode = dimensionless\n\
         gamma1_values = 1e-4, 1e-3, 1e-2\ngamma2_values = 0.1, 1\nparallelism = 2\n",
    )
    .unwrap();
    let sweep = cfg.sweep.unwrap();
    assert_eq!(sweep.mode, SweepMode::Dimensionless);
    assert_eq!(sweep.gamma1_values, vec![1e-4, 1e-3, 1e-2]);
    assert_eq!(sweep.gamma2_values, vec![0.1, 1.0]);
    assert_eq!(sweep.parallelism, Some(2));
}

#[test]
fn physical_sweep_requires_physical_section() {
    let err = RunConfig::parse(
        "[dimensionless]\ng_a = 1\n\n[sweep]\nmode = physical\n\
         gamma1_values = 1e-22\ngamma2_values = 1e9\n",
    )
    .unwrap_err();
    assert!(err.to_string().contains("physical"), "{err}");
}

#[test]
fn sweep_rejects_empty_or_negative_axes() {
    assert!(RunConfig::parse(
        "[sweep]\ngamma1_values = 1, -2\ngamma2_values = 1\n"
    )
    .is_err());
    assert!(RunConfig::parse("[sweep]\ngamma1_values = 1\n").is_err());
}

#[test]
fn invariants_checked_with_field_paths() {
    let err = RunConfig::parse("[seed]\nmol_fraction = 1.5\n").unwrap_err();
    assert!(err.to_string().contains("mol_fraction"), "{err}");
    let err = RunConfig::parse("[classify]\nwindow_fraction = 0\n").unwrap_err();
    assert!(err.to_string().contains("window_fraction"), "{err}");
    let err = RunConfig::parse("[relaxation]\nmu_tol = 0\n").unwrap_err();
    assert!(err.to_string().contains("relaxation"), "{err}");
}

#[test]
fn duplicate_keys_rejected() {
    let err = RunConfig::parse("[grid]\nnx = 64\nnx = 128\n").unwrap_err();
    assert!(err.to_string().contains("duplicate"), "{err}");
}

#[test]
fn full_horizon_restores_published_time() {
    let mut cfg = RunConfig::parse("[physical]\npreset = rb85-mfr\n").unwrap();
    cfg.apply_full_horizon();
    assert!((cfg.dimensionless.tau_total - 299.0010808).abs() < 1e-4);
    assert_eq!(cfg.physical.unwrap().t_total, 3.75);
}
