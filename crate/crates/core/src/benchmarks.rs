//! Canonical test problems.

use crate::error::Result;
use crate::grid::{Grid1D, Subdomains};
use crate::model::{CascadeCoefficients, CoefficientField};
use crate::scalar::{cst, Real};
use crate::tree::{AdaptedField, ScenarioTree};

/// Reference scale: two components, 31 interior points, 10 levels, `T = 1`.
pub const REFERENCE_N: usize = 2;
pub const REFERENCE_NX: usize = 31;
pub const REFERENCE_DEPTH: usize = 10;
pub const REFERENCE_HORIZON: f64 = 1.0;

#[derive(Clone, Debug)]
pub struct Setup<T> {
    pub grid: Grid1D<T>,
    pub tree: ScenarioTree<T>,
    pub subdomains: Subdomains,
    pub coeffs: CascadeCoefficients<T>,
}

impl<T: Real> Setup<T> {
    fn base(n: usize, nx: usize, depth: usize, horizon: T) -> Result<Self> {
        let grid = Grid1D::new(nx)?;
        Ok(Self {
            tree: ScenarioTree::new(depth, horizon)?,
            subdomains: Subdomains::default_for(&grid)?,
            coeffs: CascadeCoefficients::new(n)?,
            grid,
        })
    }

    /// `yT_i = sin(πx)` for every component, deterministic.
    pub fn sine_terminal(&self) -> AdaptedField<T> {
        let s = self.grid.sample(|x| (T::PI() * x).sin());
        let v: Vec<T> = (0..self.coeffs.n()).flat_map(|_| s.iter().copied()).collect();
        AdaptedField::deterministic(self.tree.depth(), v)
    }
}

/// Two components coupled by `a21 = 1` on `G~0`, all other potentials zero.
pub fn coupled<T: Real>(nx: usize, depth: usize, horizon: T) -> Result<Setup<T>> {
    let mut s = Setup::base(2, nx, depth, horizon)?;
    s.coeffs = s.coeffs.with_reaction(1, 0, CoefficientField::indicator(&s.subdomains.coupling, T::one()));
    Ok(s)
}

/// The coupled benchmark with `a21 = 0`: the second component is invisible.
pub fn decoupled<T: Real>(nx: usize, depth: usize, horizon: T) -> Result<Setup<T>> {
    Setup::base(2, nx, depth, horizon)
}

/// Every admissible entry of `A`, `C` and `B` nonzero, including noise.
pub fn general_stochastic<T: Real>(nx: usize, depth: usize, horizon: T) -> Result<Setup<T>> {
    let mut s = coupled(nx, depth, horizon)?;
    let c = |v: f64| CoefficientField::Constant(cst::<T>(v));
    s.coeffs = s
        .coeffs
        .with_reaction(0, 0, c(0.3))
        .with_reaction(0, 1, c(0.5))
        .with_reaction(1, 1, c(-0.2))
        .with_convection(0, 0, c(0.2))
        .with_convection(0, 1, c(-0.3))
        .with_convection(1, 1, c(0.1))
        .with_noise(0, 0, c(0.4))
        .with_noise(0, 1, c(-0.3))
        .with_noise(1, 1, c(0.25));
    Ok(s)
}

/// A single heat equation.
pub fn zero_potential<T: Real>(nx: usize, depth: usize, horizon: T) -> Result<Setup<T>> {
    Setup::base(1, nx, depth, horizon)
}
