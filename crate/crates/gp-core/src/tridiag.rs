//! Thomas algorithm (Gaussian elimination + back substitution) for the
//! complex tridiagonal systems produced by the Crank-Nicolson step.
//!
//! No pivoting: the CN matrices are diagonally dominant
//! (`diag = 1 + O(dtau)` off-diagonal), so classic elimination is stable.
//! A vanishing pivot turns into a [`GpError::SingularSystem`] instead of NaNs.

use crate::error::{GpError, Result};
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;

/// Minimum pivot magnitude (per component) before the system counts as
/// singular.
const PIVOT_FLOOR: f64 = 1e-300;

/// A tridiagonal system `A x = rhs` with `lower`/`upper` of length `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<C64>,
    pub diag: Vec<C64>,
    pub upper: Vec<C64>,
    pub rhs: Vec<C64>,
}

impl TridiagonalSystem {
    pub fn new(lower: Vec<C64>, diag: Vec<C64>, upper: Vec<C64>, rhs: Vec<C64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(crate::error::invalid("tridiagonal system: empty diagonal"));
        }
        if lower.len() != n - 1 || upper.len() != n - 1 || rhs.len() != n {
            return Err(crate::error::invalid(alloc::format!(
                "tridiagonal system: inconsistent lengths (diag {n}, lower {}, upper {}, rhs {})",
                lower.len(),
                upper.len(),
                rhs.len()
            )));
        }
        Ok(Self { lower, diag, upper, rhs })
    }

    /// Solve, leaving the system unmodified.
    pub fn solve(&self) -> Result<Vec<C64>> {
        let n = self.diag.len();
        let mut x = self.rhs.clone();
        let mut scratch = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
        solve_in_place(&self.lower, &self.diag, &self.upper, &mut x, &mut scratch)?;
        Ok(x)
    }
}

fn pivot_ok(z: C64) -> bool {
    z.re.abs().max(z.im.abs()) >= PIVOT_FLOOR
}

/// Thomas solve with caller-provided scratch (length >= n - 1), so the
/// propagator's inner loop allocates nothing. `x` holds the right-hand side
/// on entry and the solution on exit. O(n) time, no O(n^2) storage.
pub fn solve_in_place(
    lower: &[C64],
    diag: &[C64],
    upper: &[C64],
    x: &mut [C64],
    scratch: &mut [C64],
) -> Result<()> {
    let n = diag.len();
    debug_assert_eq!(lower.len(), n - 1);
    debug_assert_eq!(upper.len(), n - 1);
    debug_assert_eq!(x.len(), n);
    debug_assert!(scratch.len() >= n - 1);

    if !pivot_ok(diag[0]) {
        return Err(GpError::SingularSystem { row: 0 });
    }
    if n > 1 {
        scratch[0] = upper[0] / diag[0];
    }
    x[0] /= diag[0];

    for i in 1..n {
        let den = diag[i] - lower[i - 1] * scratch[i - 1];
        if !pivot_ok(den) {
            return Err(GpError::SingularSystem { row: i });
        }
        if i < n - 1 {
            scratch[i] = upper[i] / den;
        }
        x[i] = (x[i] - lower[i - 1] * x[i - 1]) / den;
    }

    for i in (0..n - 1).rev() {
        let t = scratch[i] * x[i + 1];
        x[i] -= t;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_diagonal_returns_rhs() {
        let rhs: Vec<C64> = (0..8).map(|k| c(k as f64, -(k as f64))).collect();
        let sys = TridiagonalSystem::new(
            vec![c(0.0, 0.0); 7],
            vec![c(1.0, 0.0); 8],
            vec![c(0.0, 0.0); 7],
            rhs.clone(),
        )
        .unwrap();
        let x = sys.solve().unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn three_by_three_known_solution() {
        // [4 1 0; 1 4 1; 0 1 4] x = (1, 2, 3): x = (5/28, 2/7, 19/28).
        let sys = TridiagonalSystem::new(
            vec![c(1.0, 0.0); 2],
            vec![c(4.0, 0.0); 3],
            vec![c(1.0, 0.0); 2],
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
        )
        .unwrap();
        let x = sys.solve().unwrap();
        let expected = [5.0 / 28.0, 2.0 / 7.0, 19.0 / 28.0];
        for (xi, ei) in x.iter().zip(expected) {
            assert!((xi.re - ei).abs() < 1e-14);
            assert!(xi.im.abs() < 1e-14);
        }
        // Input untouched.
        assert_eq!(sys.rhs[2], c(3.0, 0.0));
    }

    #[test]
    fn zero_pivot_reports_row() {
        let sys = TridiagonalSystem::new(
            vec![c(1.0, 0.0); 2],
            vec![c(1.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)],
            vec![c(1.0, 0.0); 2],
            vec![c(1.0, 0.0); 3],
        )
        .unwrap();
        // Elimination at row 1: den = 1 - 1 * (1/1) = 0.
        match sys.solve() {
            Err(GpError::SingularSystem { row }) => assert_eq!(row, 1),
            other => panic!("expected singular system, got {other:?}"),
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(TridiagonalSystem::new(
            vec![c(1.0, 0.0); 3],
            vec![c(1.0, 0.0); 3],
            vec![c(1.0, 0.0); 2],
            vec![c(1.0, 0.0); 3],
        )
        .is_err());
    }
}
