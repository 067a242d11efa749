//! Per-level evaluation of the lower-order terms and diffusion factors.

use crate::error::Result;
use crate::grid::{add_gradient, Grid1D};
use crate::linalg::TridiagonalFactor;
use crate::model::{CascadeCoefficients, CoefficientField, CoefficientKind};
use crate::scalar::Real;

fn sample_level<T: Real>(field: &CoefficientField<T>, m: usize, nx: usize) -> Option<Vec<T>> {
    if field.is_zero() {
        return None;
    }
    Some((0..nx).map(|j| field.at(m, j)).collect())
}

/// Reaction, convection and noise matrices frozen at one time level.
pub(crate) struct LevelTerms<T> {
    n: usize,
    nx: usize,
    h: T,
    reaction: Vec<Option<Vec<T>>>,
    convection: Vec<Option<Vec<T>>>,
    noise: Vec<Option<Vec<T>>>,
}

impl<T: Real> LevelTerms<T> {
    pub(crate) fn new(coeffs: &CascadeCoefficients<T>, m: usize, grid: &Grid1D<T>) -> Self {
        let (n, nx) = (coeffs.n(), grid.nx());
        let collect = |kind: CoefficientKind| {
            (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let field = match kind {
                        CoefficientKind::Reaction => coeffs.reaction(i, j),
                        CoefficientKind::Convection => coeffs.convection(i, j),
                        CoefficientKind::Noise => coeffs.noise(i, j),
                    };
                    sample_level(field, m, nx)
                })
                .collect::<Vec<_>>()
        };
        Self {
            n,
            nx,
            h: grid.h(),
            reaction: collect(CoefficientKind::Reaction),
            convection: collect(CoefficientKind::Convection),
            noise: collect(CoefficientKind::Noise),
        }
    }

    fn block<'a>(&self, v: &'a [T], i: usize) -> &'a [T] {
        &v[i * self.nx..(i + 1) * self.nx]
    }

    /// `out = z + dt (-A^* z + D(C^* z))`, where `(A^* z)_i = sum_j a_ji z_j`
    /// and `(D(C^* z))_i = sum_j D(C_ji z_j)`.
    pub(crate) fn adjoint_drift_step(&self, z: &[T], dt: T, out: &mut [T]) {
        out.copy_from_slice(z);
        let mut product = vec![T::zero(); self.nx];
        for i in 0..self.n {
            let dst = &mut out[i * self.nx..(i + 1) * self.nx];
            for j in 0..self.n {
                let zj = self.block(z, j);
                if let Some(a) = &self.reaction[j * self.n + i] {
                    for ((d, &aj), &zv) in dst.iter_mut().zip(a).zip(zj) {
                        *d = *d - dt * aj * zv;
                    }
                }
                if let Some(c) = &self.convection[j * self.n + i] {
                    for ((p, &cj), &zv) in product.iter_mut().zip(c).zip(zj) {
                        *p = cj * zv;
                    }
                    add_gradient(&product, self.h, dt, dst);
                }
            }
        }
    }

    /// `out = -B^* z`.
    pub(crate) fn adjoint_noise(&self, z: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for i in 0..self.n {
            let dst = &mut out[i * self.nx..(i + 1) * self.nx];
            for j in 0..self.n {
                if let Some(b) = &self.noise[j * self.n + i] {
                    for ((d, &bj), &zv) in dst.iter_mut().zip(b).zip(self.block(z, j)) {
                        *d = *d - bj * zv;
                    }
                }
            }
        }
    }

    /// `out += scale (A w + C D w)`.
    pub(crate) fn add_state_drift(&self, w: &[T], scale: T, out: &mut [T]) {
        let mut grad = vec![T::zero(); self.nx];
        for j in 0..self.n {
            let wj = self.block(w, j);
            let has_conv = (0..self.n).any(|i| self.convection[i * self.n + j].is_some());
            if has_conv {
                grad.iter_mut().for_each(|g| *g = T::zero());
                add_gradient(wj, self.h, T::one(), &mut grad);
            }
            for i in 0..self.n {
                let dst = &mut out[i * self.nx..(i + 1) * self.nx];
                if let Some(a) = &self.reaction[i * self.n + j] {
                    for ((d, &av), &wv) in dst.iter_mut().zip(a).zip(wj) {
                        *d = *d + scale * av * wv;
                    }
                }
                if let Some(c) = &self.convection[i * self.n + j] {
                    for ((d, &cv), &gv) in dst.iter_mut().zip(c).zip(&grad) {
                        *d = *d + scale * cv * gv;
                    }
                }
            }
        }
    }

    /// `out += scale B y`.
    pub(crate) fn add_state_noise(&self, y: &[T], scale: T, out: &mut [T]) {
        for i in 0..self.n {
            let dst = &mut out[i * self.nx..(i + 1) * self.nx];
            for j in 0..self.n {
                if let Some(b) = &self.noise[i * self.n + j] {
                    for ((d, &bv), &yv) in dst.iter_mut().zip(b).zip(self.block(y, j)) {
                        *d = *d + scale * bv * yv;
                    }
                }
            }
        }
    }
}

/// Factors of `I - dt L_k(t_m)` for every component at one level; empty when
/// diffusion is disabled.
pub(crate) struct ImplicitDiffusion<T> {
    nx: usize,
    factors: Vec<TridiagonalFactor<T>>,
}

impl<T: Real> ImplicitDiffusion<T> {
    pub(crate) fn new(coeffs: &CascadeCoefficients<T>, m: usize, dt: T, grid: &Grid1D<T>) -> Result<Self> {
        let factors = if coeffs.diffusion_enabled() {
            (0..coeffs.n())
                .map(|k| coeffs.diffusion_operator(k, m, grid)?.implicit_factor(dt))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self { nx: grid.nx(), factors })
    }

    pub(crate) fn solve_in_place(&self, v: &mut [T]) {
        for (block, f) in v.chunks_exact_mut(self.nx).zip(&self.factors) {
            f.solve_in_place(block);
        }
    }
}
