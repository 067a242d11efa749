//! Small dense and banded linear algebra used by the solvers.

pub mod cg;
pub mod dense;
pub mod jacobi;
pub mod tridiag;

pub use cg::{conjugate_gradient, CgOutcome};
pub use dense::DenseMatrix;
pub use jacobi::{symmetric_eigen, SymmetricEigen};
pub use tridiag::TridiagonalFactor;
