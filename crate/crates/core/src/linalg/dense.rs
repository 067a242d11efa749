use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(order: usize) -> Self {
        Self { order, data: vec![T::zero(); order * order] }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let order = columns.len();
        let mut m = Self::zeros(order);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), order, "column length must equal matrix order");
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.order + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.order).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        self.data.chunks_exact(self.order).map(|row| crate::scalar::dot(row, x)).collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        crate::scalar::dot(x, &self.mul_vec(y))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.order {
            for j in i + 1..self.order {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let half = crate::scalar::cst::<T>(0.5);
        let mut out = self.clone();
        for i in 0..self.order {
            for j in 0..self.order {
                out.set(i, j, half * (self.get(i, j) + self.get(j, i)));
            }
        }
        out
    }

    /// `B^T A B` for a row-major `order x k` matrix `B` given by its columns.
    pub fn congruence(&self, basis: &[Vec<T>]) -> Self {
        let k = basis.len();
        let images: Vec<Vec<T>> = basis.iter().map(|b| self.mul_vec(b)).collect();
        let mut out = Self::zeros(k);
        for i in 0..k {
            for j in i..k {
                let v = crate::scalar::dot(&basis[i], &images[j]);
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }
}
