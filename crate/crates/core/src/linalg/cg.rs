//! Matrix-free conjugate gradient for symmetric positive definite operators.

use crate::error::{Error, Result};
use crate::scalar::{axpy, Real};

#[derive(Clone, Debug)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Solves `A x = b` starting from zero, where `apply` evaluates `A` and
/// `inner` is the inner product in which `A` is self-adjoint.
///
/// Stops when `|r| <= tol * |b|`.
pub fn conjugate_gradient<T, A, I>(mut apply: A, rhs: &[T], inner: I, tol: T, max_iter: usize) -> Result<CgOutcome<T>>
where
    T: Real,
    A: FnMut(&[T]) -> Result<Vec<T>>,
    I: Fn(&[T], &[T]) -> T,
{
    let mut x = vec![T::zero(); rhs.len()];
    let b_norm = inner(rhs, rhs).sqrt();
    if b_norm == T::zero() {
        return Ok(CgOutcome { solution: x, iterations: 0, relative_residual: T::zero() });
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = inner(&r, &r);
    let mut iterations = 0;
    loop {
        let rel = rr.sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgOutcome { solution: x, iterations, relative_residual: rel });
        }
        if iterations == max_iter {
            return Err(Error::ConvergenceFailure { iterations, relative_residual: rel.to_f64().unwrap_or(f64::NAN) });
        }
        let ap = apply(&p)?;
        let curvature = inner(&p, &ap);
        if !(curvature > T::zero()) {
            return Err(Error::NumericalFailure(format!(
                "operator is not positive definite along search direction (p^T A p = {curvature})"
            )));
        }
        let alpha = rr / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_next = inner(&r, &r);
        let beta = rr_next / rr;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_next;
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::scalar::dot;

    #[test]
    fn solves_spd_system() {
        let n = 12;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| if i == j { 4.0 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) }).collect())
            .collect();
        let a = DenseMatrix::from_columns(&cols);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let out = conjugate_gradient(|v| Ok(a.mul_vec(v)), &b, dot, 1e-12, 100).unwrap();
        let r = a.mul_vec(&out.solution);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
        assert!(out.iterations <= n + 2);
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let out = conjugate_gradient(|v: &[f64]| Ok(v.to_vec()), &[0.0; 4], dot, 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution, vec![0.0; 4]);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let a = DenseMatrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 10.0, 0.0], vec![0.0, 0.0, 100.0]]);
        let err = conjugate_gradient(|v| Ok(a.mul_vec(v)), &[1.0, 1.0, 1.0], dot, 1e-14, 1);
        assert!(matches!(err, Err(Error::ConvergenceFailure { iterations: 1, .. })));
    }
}
