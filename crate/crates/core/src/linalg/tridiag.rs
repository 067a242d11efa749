//! Thomas elimination for tridiagonal systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct TridiagonalFactor<T> {
    sub: Vec<T>,
    upper: Vec<T>,
    inv_pivot: Vec<T>,
}

impl<T: Real> TridiagonalFactor<T> {
    /// Factors the matrix with sub-diagonal `sub`, diagonal `diag` and
    /// super-diagonal `sup` (`sub[i]` couples row `i + 1` to column `i`).
    pub fn new(sub: &[T], diag: &[T], sup: &[T]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                context: "tridiagonal factor",
                expected: n.saturating_sub(1),
                actual: sub.len().max(sup.len()),
            });
        }
        let mut upper = vec![T::zero(); n.saturating_sub(1)];
        let mut inv_pivot = vec![T::zero(); n];
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - sub[i - 1] * upper[i - 1];
            }
            if pivot == T::zero() || !pivot.is_finite() {
                return Err(Error::NumericalFailure(format!("tridiagonal pivot breakdown in row {i}")));
            }
            inv_pivot[i] = T::one() / pivot;
            if i + 1 < n {
                upper[i] = sup[i] * inv_pivot[i];
            }
        }
        Ok(Self { sub: sub.to_vec(), upper, inv_pivot })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.upper[i] * rhs[i + 1];
        }
    }
}
