//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair once and annihilates it with a
//! plane rotation; rotations are accumulated into the eigenvector matrix.
//! Convergence is declared when the off-diagonal Frobenius mass falls below
//! `eps * ||A||_F`.

use super::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cst, Real};

/// Default cap on the number of full sweeps.
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` pairs with `values[k]`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub sweeps: usize,
}

pub fn symmetric_eigen<T: Real>(matrix: &DenseMatrix<T>, max_sweeps: usize) -> Result<SymmetricEigen<T>> {
    let n = matrix.order();
    let mut a = matrix.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let frob = {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s = s + a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };
    let tol = T::epsilon() * frob;
    let off = |a: &DenseMatrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                s = s + a.get(i, j) * a.get(i, j);
            }
        }
        (cst::<T>(2.0) * s).sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > tol {
        if sweeps == max_sweeps {
            return Err(Error::EigensolverFailure { sweeps: max_sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (cst::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, T::zero());
                a.set(q, p, T::zero());
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| a.get(i, i)).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_small_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let m = DenseMatrix::<f64>::from_columns(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = symmetric_eigen(&m, DEFAULT_MAX_SWEEPS).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_matrix() {
        let n = 9;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| 1.0 / (1.0 + i as f64 + j as f64) + if i == j { 0.5 } else { 0.0 }).collect())
            .collect();
        let m = DenseMatrix::from_columns(&cols);
        let e = symmetric_eigen(&m, DEFAULT_MAX_SWEEPS).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j]).sum();
                assert!((r - m.get(i, j)).abs() < 1e-13);
            }
        }
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn sweep_cap_is_enforced() {
        let m = DenseMatrix::from_columns(&[vec![1.0, 2.0], vec![2.0, -1.0]]);
        assert!(matches!(symmetric_eigen(&m, 0), Err(Error::EigensolverFailure { .. })));
    }
}
