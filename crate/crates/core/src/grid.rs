//! One-dimensional finite differences on `G = (0, 1)` with homogeneous
//! Dirichlet data.
//!
//! Only the `N_x` interior points `x_j = j h`, `h = 1 / (N_x + 1)`, are
//! stored; ghost values at `x = 0` and `x = 1` are zero. Vectors carrying
//! several components are component-major: component `i` occupies
//! `[i * N_x, (i + 1) * N_x)`.

use crate::error::{Error, Result};
use crate::linalg::TridiagonalFactor;
use crate::scalar::{cst, from_usize, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D<T> {
    nx: usize,
    h: T,
}

impl<T: Real> Grid1D<T> {
    pub fn new(nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(Error::InvalidArgument(format!("grid needs at least 3 interior points, got {nx}")));
        }
        Ok(Self { nx, h: T::one() / from_usize(nx + 1) })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Coordinate of interior point `j` (0-based), i.e. `(j + 1) h`.
    pub fn x(&self, j: usize) -> T {
        from_usize::<T>(j + 1) * self.h
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    /// Samples `f` at the interior points.
    pub fn sample<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        (0..self.nx).map(|j| f(self.x(j))).collect()
    }

    fn check_len(&self, context: &'static str, v: &[T]) -> Result<()> {
        if v.len() != self.nx {
            return Err(Error::DimensionMismatch { context, expected: self.nx, actual: v.len() });
        }
        Ok(())
    }
}

/// Which role a subdomain plays in the control problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubdomainRole {
    /// `G_0`, where the control acts and `z_1` is observed.
    Control,
    /// `G~_0`, where the coupling floor `a_0` must hold.
    Coupling,
    /// `G_1`, where the Carleman base function may have critical points.
    Weight,
    /// Any other region (e.g. the Carleman observation set).
    Other,
}

/// Set of interior grid points lying in an open interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdomainMask {
    role: SubdomainRole,
    bounds: (f64, f64),
    flags: Vec<bool>,
}

impl SubdomainMask {
    /// Points with `lo < x_j < hi`; requires `0 <= lo < hi <= 1` and at least one point.
    pub fn interval<T: Real>(grid: &Grid1D<T>, role: SubdomainRole, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lo) || !(hi > lo && hi <= 1.0) {
            return Err(Error::InvalidArgument(format!("subdomain ({lo}, {hi}) is not an interval inside (0, 1)")));
        }
        let flags: Vec<bool> = (0..grid.nx())
            .map(|j| {
                let x = grid.x(j).to_f64().unwrap_or(f64::NAN);
                x > lo && x < hi
            })
            .collect();
        if !flags.iter().any(|&f| f) {
            return Err(Error::InvalidArgument(format!("subdomain ({lo}, {hi}) contains no grid point")));
        }
        Ok(Self { role, bounds: (lo, hi), flags })
    }

    /// Every interior point.
    pub fn whole<T: Real>(grid: &Grid1D<T>, role: SubdomainRole) -> Self {
        Self { role, bounds: (0.0, 1.0), flags: vec![true; grid.nx()] }
    }

    pub fn role(&self) -> SubdomainRole {
        self.role
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }

    pub fn contains(&self, j: usize) -> bool {
        self.flags.get(j).copied().unwrap_or(false)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.flags.iter().enumerate().filter(|(_, &f)| f).map(|(j, _)| j).collect()
    }

    pub fn is_subset_of(&self, other: &SubdomainMask) -> bool {
        self.flags.len() == other.flags.len() && self.flags.iter().zip(&other.flags).all(|(&a, &b)| !a || b)
    }

    /// 0/1 indicator vector.
    pub fn indicator<T: Real>(&self) -> Vec<T> {
        self.flags.iter().map(|&f| if f { T::one() } else { T::zero() }).collect()
    }

    /// Zeroes the entries of `v` outside the mask.
    pub fn restrict_in_place<T: Real>(&self, v: &mut [T]) {
        for (x, &f) in v.iter_mut().zip(&self.flags) {
            if !f {
                *x = T::zero();
            }
        }
    }
}

/// The three nested regions `G_1 ⋐ G~_0 ⊆ G_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subdomains {
    pub control: SubdomainMask,
    pub coupling: SubdomainMask,
    pub weight: SubdomainMask,
}

/// Default interval bounds for `G_0`, `G~_0` and `G_1`.
pub const DEFAULT_CONTROL: (f64, f64) = (0.3, 0.8);
pub const DEFAULT_COUPLING: (f64, f64) = (0.35, 0.75);
pub const DEFAULT_WEIGHT: (f64, f64) = (0.45, 0.65);

impl Subdomains {
    /// Builds the masks and checks `G_1 ⋐ G~_0 ⊆ G_0` both on the interval
    /// bounds and on the sampled point sets.
    pub fn new<T: Real>(
        grid: &Grid1D<T>,
        control: (f64, f64),
        coupling: (f64, f64),
        weight: (f64, f64),
    ) -> Result<Self> {
        if !(control.0 > 0.0 && control.1 < 1.0) {
            return Err(Error::InvalidArgument("control region must be compactly inside (0, 1)".into()));
        }
        if coupling.0 < control.0 || coupling.1 > control.1 {
            return Err(Error::InvalidArgument("coupling region must lie inside the control region".into()));
        }
        if !(weight.0 > coupling.0 && weight.1 < coupling.1) {
            return Err(Error::InvalidArgument("weight region must be compactly inside the coupling region".into()));
        }
        let out = Self {
            control: SubdomainMask::interval(grid, SubdomainRole::Control, control.0, control.1)?,
            coupling: SubdomainMask::interval(grid, SubdomainRole::Coupling, coupling.0, coupling.1)?,
            weight: SubdomainMask::interval(grid, SubdomainRole::Weight, weight.0, weight.1)?,
        };
        debug_assert!(out.weight.is_subset_of(&out.coupling) && out.coupling.is_subset_of(&out.control));
        Ok(out)
    }

    pub fn default_for<T: Real>(grid: &Grid1D<T>) -> Result<Self> {
        Self::new(grid, DEFAULT_CONTROL, DEFAULT_COUPLING, DEFAULT_WEIGHT)
    }
}

/// Discrete `d/dx (beta d/dx)` with Dirichlet data: a symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionOperator<T> {
    diag: Vec<T>,
    off: Vec<T>,
    half_point_beta: Vec<T>,
}

impl<T: Real> DiffusionOperator<T> {
    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    /// Sub-diagonal; equal to the super-diagonal.
    pub fn sub(&self) -> &[T] {
        &self.off
    }

    pub fn sup(&self) -> &[T] {
        &self.off
    }

    pub fn half_point_beta(&self) -> &[T] {
        &self.half_point_beta
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.diag.len();
        (0..n)
            .map(|j| {
                let mut r = self.diag[j] * v[j];
                if j > 0 {
                    r = r + self.off[j - 1] * v[j - 1];
                }
                if j + 1 < n {
                    r = r + self.off[j] * v[j + 1];
                }
                r
            })
            .collect()
    }

    /// Factors `I - dt L`.
    pub fn implicit_factor(&self, dt: T) -> Result<TridiagonalFactor<T>> {
        let diag: Vec<T> = self.diag.iter().map(|&d| T::one() - dt * d).collect();
        let off: Vec<T> = self.off.iter().map(|&o| -dt * o).collect();
        TridiagonalFactor::new(&off, &diag, &off)
    }
}

/// Half-point samples `beta(x_{j+1/2})`, `j = 0..=N_x`, from interior nodal
/// samples: arithmetic mean of the two neighbours, and the adjacent interior
/// value at the two boundary half-points.
pub fn half_point_samples<T: Real>(nodal: &[T]) -> Vec<T> {
    let n = nodal.len();
    let half = cst::<T>(0.5);
    (0..=n)
        .map(|j| match j {
            0 => nodal[0],
            j if j == n => nodal[n - 1],
            j => half * (nodal[j - 1] + nodal[j]),
        })
        .collect()
}

/// Assembles the diffusion operator from `N_x + 1` half-point samples.
///
/// Row `j` encodes `(b_{j+1/2}(v_{j+1} - v_j) - b_{j-1/2}(v_j - v_{j-1})) / h^2`.
pub fn assemble_diffusion<T: Real>(beta_half: &[T], beta_floor: T, grid: &Grid1D<T>) -> Result<DiffusionOperator<T>> {
    let nx = grid.nx();
    if beta_half.len() != nx + 1 {
        return Err(Error::DimensionMismatch {
            context: "half-point diffusion samples",
            expected: nx + 1,
            actual: beta_half.len(),
        });
    }
    if let Some((index, &value)) = beta_half.iter().enumerate().find(|(_, &b)| !(b >= beta_floor)) {
        return Err(Error::EllipticityViolation {
            index,
            value: value.to_f64().unwrap_or(f64::NAN),
            floor: beta_floor.to_f64().unwrap_or(f64::NAN),
        });
    }
    let inv_h2 = T::one() / (grid.h() * grid.h());
    let diag = (0..nx).map(|j| -(beta_half[j] + beta_half[j + 1]) * inv_h2).collect();
    let off = (1..nx).map(|j| beta_half[j] * inv_h2).collect();
    Ok(DiffusionOperator { diag, off, half_point_beta: beta_half.to_vec() })
}

/// Centered difference `(v_{j+1} - v_{j-1}) / (2h)` with zero ghosts.
pub fn gradient<T: Real>(field: &[T], grid: &Grid1D<T>) -> Result<Vec<T>> {
    grid.check_len("gradient", field)?;
    let mut out = vec![T::zero(); field.len()];
    gradient_into(field, grid.h(), &mut out);
    Ok(out)
}

pub(crate) fn gradient_into<T: Real>(v: &[T], h: T, out: &mut [T]) {
    let n = v.len();
    let s = T::one() / (cst::<T>(2.0) * h);
    for j in 0..n {
        let right = if j + 1 < n { v[j + 1] } else { T::zero() };
        let left = if j > 0 { v[j - 1] } else { T::zero() };
        out[j] = (right - left) * s;
    }
}

/// Adds `scale * D v` to `out`, `D` being the centered difference.
pub(crate) fn add_gradient<T: Real>(v: &[T], h: T, scale: T, out: &mut [T]) {
    let n = v.len();
    let s = scale / (cst::<T>(2.0) * h);
    for j in 0..n {
        let right = if j + 1 < n { v[j + 1] } else { T::zero() };
        let left = if j > 0 { v[j - 1] } else { T::zero() };
        out[j] = out[j] + (right - left) * s;
    }
}

/// Centered divergence of the pointwise product `c z`, zero ghosts.
pub fn divergence_of_product<T: Real>(c: &[T], z: &[T], grid: &Grid1D<T>) -> Result<Vec<T>> {
    grid.check_len("divergence coefficient", c)?;
    grid.check_len("divergence operand", z)?;
    let product: Vec<T> = c.iter().zip(z).map(|(&a, &b)| a * b).collect();
    gradient(&product, grid)
}

/// `h * sum_j a_j b_j`.
pub fn l2_inner<T: Real>(a: &[T], b: &[T], grid: &Grid1D<T>) -> Result<T> {
    if a.len() != b.len() || !a.len().is_multiple_of(grid.nx()) {
        return Err(Error::DimensionMismatch { context: "l2 inner product", expected: a.len(), actual: b.len() });
    }
    Ok(grid.h() * crate::scalar::dot(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_spacing() {
        let g = Grid1D::<f64>::new(31).unwrap();
        assert!((g.h() * 32.0 - 1.0).abs() < 1e-15);
        assert!(Grid1D::<f64>::new(2).is_err());
    }

    #[test]
    fn unit_laplacian_stencil() {
        let g = Grid1D::<f64>::new(3).unwrap();
        let op = assemble_diffusion(&[1.0; 4], 1.0, &g).unwrap();
        assert_eq!(op.diag(), &[-32.0, -32.0, -32.0]);
        assert_eq!(op.sub(), &[16.0, 16.0]);
        assert_eq!(op.sup(), &[16.0, 16.0]);
    }

    #[test]
    fn sine_mode_eigenpair() {
        let g = Grid1D::<f64>::new(31).unwrap();
        let op = assemble_diffusion(&vec![1.0; 32], 1.0, &g).unwrap();
        let v = g.sample(|x| (PI * x).sin());
        let h = g.h();
        let lam = -(2.0 / (h * h)) * (1.0 - (PI * h).cos());
        for (a, b) in op.apply(&v).iter().zip(&v) {
            assert!((a - lam * b).abs() < 1e-12 * lam.abs());
        }
    }

    #[test]
    fn ellipticity_violation() {
        let g = Grid1D::<f64>::new(3).unwrap();
        let err = assemble_diffusion(&[1.0, 0.0, 1.0, 1.0], 0.5, &g);
        assert!(matches!(err, Err(Error::EllipticityViolation { index: 1, .. })));
    }

    #[test]
    fn gradient_examples() {
        let g = Grid1D::<f64>::new(7).unwrap();
        let h = g.h();
        let lin = g.points();
        let d = gradient(&lin, &g).unwrap();
        for j in 1..6 {
            assert!((d[j] - 1.0).abs() < 1e-14);
        }
        assert!((d[0] - lin[1] / (2.0 * h)).abs() < 1e-14);
        assert!((d[6] + lin[5] / (2.0 * h)).abs() < 1e-14);

        let c = gradient(&[2.0; 7], &g).unwrap();
        assert!((c[0] - 2.0 / (2.0 * h)).abs() < 1e-12);
        assert!((c[6] + 2.0 / (2.0 * h)).abs() < 1e-12);
        assert!(c[1..6].iter().all(|&x| x == 0.0));

        let q: Vec<f64> = lin.iter().map(|x| x * x).collect();
        let dq = gradient(&q, &g).unwrap();
        for j in 1..6 {
            assert!((dq[j] - 2.0 * lin[j]).abs() < 1e-13);
        }
        assert!(gradient(&[1.0; 3], &g).is_err());
    }

    #[test]
    fn divergence_examples() {
        let g = Grid1D::<f64>::new(9).unwrap();
        let z = g.sample(|x| (3.0 * x).sin());
        assert!(divergence_of_product(&[0.0; 9], &z, &g).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(divergence_of_product(&[1.0; 9], &z, &g).unwrap(), gradient(&z, &g).unwrap());
        assert!(divergence_of_product(&[1.0; 8], &z, &g).is_err());
    }

    #[test]
    fn l2_inner_examples() {
        let g = Grid1D::<f64>::new(3).unwrap();
        assert_eq!(l2_inner(&[1.0; 3], &[1.0; 3], &g).unwrap(), 0.75);
        assert_eq!(l2_inner(&[0.0; 3], &[5.0; 3], &g).unwrap(), 0.0);
        let g = Grid1D::<f64>::new(31).unwrap();
        let a = g.sample(|x| (PI * x).sin());
        let b = g.sample(|x| (2.0 * PI * x).sin());
        assert!(l2_inner(&a, &b, &g).unwrap().abs() < 1e-13);
        assert!(l2_inner(&a, &b[..30], &g).is_err());
    }

    #[test]
    fn subdomain_nesting() {
        let g = Grid1D::<f64>::new(31).unwrap();
        let s = Subdomains::default_for(&g).unwrap();
        assert!(s.weight.is_subset_of(&s.coupling));
        assert!(s.coupling.is_subset_of(&s.control));
        assert!(s.weight.contains(15)); // x = 1/2
        assert!(Subdomains::new(&g, (0.3, 0.8), (0.35, 0.75), (0.3, 0.6)).is_err());
        assert!(Subdomains::new(&g, (0.3, 0.8), (0.2, 0.75), (0.45, 0.6)).is_err());
        assert!(SubdomainMask::interval(&g, SubdomainRole::Other, 0.5, 0.51).is_err());
    }

    #[test]
    fn half_point_sampling_is_arithmetic_mean() {
        let hp = half_point_samples(&[1.0, 3.0, 5.0]);
        assert_eq!(hp, vec![1.0, 2.0, 4.0, 5.0]);
    }
}
