//! Tridiagonal solver against an independent dense-elimination oracle.

use gp_core::tridiag::{solve_in_place, TridiagonalSystem};
use gp_core::C64;
use proptest::prelude::*;

/// Dense complex Gaussian elimination with partial pivoting. Written
/// independently of the Thomas solver on purpose: it is the oracle.
fn dense_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| {
                a[p][col]
                    .norm_sqr()
                    .partial_cmp(&a[q][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        assert!(pivot.norm_sqr() > 0.0, "oracle hit a singular matrix");
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            for k in col..n {
                let t = factor * a[col][k];
                a[row][k] -= t;
            }
            let t = factor * b[col];
            b[row] -= t;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

fn dense_from_bands(lower: &[C64], diag: &[C64], upper: &[C64]) -> Vec<Vec<C64>> {
    let n = diag.len();
    let mut a = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i + 1 < n {
            a[i][i + 1] = upper[i];
            a[i + 1][i] = lower[i];
        }
    }
    a
}

fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr().sqrt()).fold(0.0, f64::max)
}

/// Complex entries in the unit box.
fn complex_in_box() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// A diagonally dominant system of size 3..=128.
fn dominant_system() -> impl Strategy<Value = TridiagonalSystem> {
    (3usize..=128).prop_flat_map(|n| {
        (
            prop::collection::vec(complex_in_box(), n - 1),
            prop::collection::vec(complex_in_box(), n - 1),
            prop::collection::vec((0.1..2.0f64, 0.0..core::f64::consts::TAU), n),
            prop::collection::vec(complex_in_box(), n),
        )
            .prop_map(move |(lower, diag_seed, margins, rhs)| {
                let diag: Vec<C64> = (0..n)
                    .map(|i| {
                        let l = if i > 0 { lower[i - 1].norm_sqr().sqrt() } else { 0.0 };
                        let u = if i < n - 1 { diag_seed[i].norm_sqr().sqrt() } else { 0.0 };
                        let (margin, phase) = margins[i];
                        let mag = l + u + margin;
                        C64::new(mag * phase.cos(), mag * phase.sin())
                    })
                    .collect();
                TridiagonalSystem::new(lower, diag, diag_seed, rhs).unwrap()
            })
    })
}

proptest! {
    /// >= 100 random diagonally-dominant systems match the dense oracle to
    /// 1e-11 relative infinity-norm.
    #[test]
    fn thomas_matches_dense_oracle(sys in dominant_system()) {
        let x = sys.solve().unwrap();
        let oracle = dense_solve(
            dense_from_bands(&sys.lower, &sys.diag, &sys.upper),
            sys.rhs.clone(),
        );
        let diff: Vec<C64> = x.iter().zip(&oracle).map(|(a, b)| a - b).collect();
        let rel = inf_norm(&diff) / inf_norm(&oracle).max(1e-30);
        prop_assert!(rel < 1e-11, "relative deviation {rel:e}");
    }

    /// solve(A, a r1 + b r2) = a solve(A, r1) + b solve(A, r2).
    #[test]
    fn thomas_is_linear(
        sys in dominant_system(),
        coeffs in (complex_in_box(), complex_in_box()),
        extra in prop::collection::vec(complex_in_box(), 128),
    ) {
        let (ca, cb) = coeffs;
        let n = sys.diag.len();
        let r2: Vec<C64> = extra[..n].to_vec();
        let x1 = sys.solve().unwrap();
        let sys2 = TridiagonalSystem::new(
            sys.lower.clone(), sys.diag.clone(), sys.upper.clone(), r2.clone(),
        ).unwrap();
        let x2 = sys2.solve().unwrap();
        let mixed_rhs: Vec<C64> =
            sys.rhs.iter().zip(&r2).map(|(a, b)| ca * a + cb * b).collect();
        let sys3 = TridiagonalSystem::new(
            sys.lower.clone(), sys.diag.clone(), sys.upper.clone(), mixed_rhs,
        ).unwrap();
        let x3 = sys3.solve().unwrap();
        let combo: Vec<C64> =
            x1.iter().zip(&x2).map(|(a, b)| ca * a + cb * b).collect();
        let diff: Vec<C64> = x3.iter().zip(&combo).map(|(a, b)| a - b).collect();
        let scale = inf_norm(&combo).max(1.0);
        prop_assert!(inf_norm(&diff) / scale < 1e-12);
    }
}

#[test]
fn crank_nicolson_matrix_vs_dense() {
    // (1 + i sigma L) for the discrete Dirichlet Laplacian at nx = 64.
    let n = 64;
    let sigma = 0.35;
    let dx = 0.2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let off = c(0.0, sigma * (-1.0 / (dx * dx)));
    let lower = vec![off; n - 1];
    let upper = vec![off; n - 1];
    let diag: Vec<C64> = (0..n).map(|_| c(1.0, sigma * 2.0 / (dx * dx))).collect();
    let rhs: Vec<C64> = (0..n)
        .map(|j| {
            let x = (j as f64 + 1.0) * dx;
            c((-x * x / 2.0).exp() * x, 0.1 * (2.0 * x).sin())
        })
        .collect();
    let sys = TridiagonalSystem::new(lower, diag, upper, rhs).unwrap();
    let x = sys.solve().unwrap();
    let oracle = dense_solve(
        dense_from_bands(&sys.lower, &sys.diag, &sys.upper),
        sys.rhs.clone(),
    );
    for (a, b) in x.iter().zip(&oracle) {
        assert!((a - b).norm_sqr().sqrt() < 1e-12);
    }
}

#[test]
fn residual_bound_on_well_conditioned_system() {
    // ||A x - rhs||_inf <= 1e-12 ||rhs||_inf.
    let n = 200;
    let lower: Vec<C64> = (0..n - 1).map(|i| C64::new(0.3, 0.1 * (i as f64).sin())).collect();
    let upper: Vec<C64> = (0..n - 1).map(|i| C64::new(-0.2, 0.15 * (i as f64).cos())).collect();
    let diag: Vec<C64> = (0..n).map(|i| C64::new(2.0 + (i as f64 * 0.7).sin(), 0.5)).collect();
    let rhs: Vec<C64> = (0..n).map(|i| C64::new((i as f64 * 0.3).cos(), 0.4)).collect();
    let sys = TridiagonalSystem::new(lower, diag, upper, rhs).unwrap();
    let x = sys.solve().unwrap();
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let mut ax = sys.diag[i] * x[i];
        if i > 0 {
            ax += sys.lower[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            ax += sys.upper[i] * x[i + 1];
        }
        residual = residual.max((ax - sys.rhs[i]).norm_sqr().sqrt());
    }
    let scale = sys.rhs.iter().map(|z| z.norm_sqr().sqrt()).fold(0.0, f64::max);
    assert!(residual <= 1e-12 * scale, "residual {residual:e}");
}

#[test]
fn runtime_scales_linearly() {
    use std::time::Instant;
    // Time per solve should double (within 25%) when n doubles; measured
    // with constant total work per size and a median over rounds.
    let sizes = [1usize << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16];
    let mut per_solve = Vec::new();
    for &n in &sizes {
        let lower = vec![C64::new(-0.25, 0.1); n - 1];
        let upper = vec![C64::new(-0.25, -0.1); n - 1];
        let diag = vec![C64::new(1.8, 0.4); n];
        let rhs0: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i % 7) as f64, 0.5)).collect();
        let mut scratch = vec![C64::new(0.0, 0.0); n];
        let reps = (1 << 22) / n;
        let mut rounds = Vec::new();
        for _ in 0..7 {
            let mut sink = C64::new(0.0, 0.0);
            let start = Instant::now();
            for _ in 0..reps {
                let mut x = rhs0.clone();
                solve_in_place(&lower, &diag, &upper, &mut x, &mut scratch).unwrap();
                sink += x[n / 2];
            }
            let dt = start.elapsed().as_secs_f64();
            assert!(sink.norm_sqr().is_finite());
            rounds.push(dt / reps as f64);
        }
        rounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        per_solve.push(rounds[rounds.len() / 2]);
    }
    for (i, w) in per_solve.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        assert!(
            (1.5..=2.5).contains(&ratio),
            "size {} -> {}: per-solve time ratio {ratio:.2} outside [1.5, 2.5] ({per_solve:?})",
            sizes[i],
            sizes[i + 1]
        );
    }
}
