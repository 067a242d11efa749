//! Penalized HUM: minimize `½ E∫ u² + (1/2ε) E|y(0)|²` over controls acting
//! on the first component in `G0`.
//!
//! The optimality system is `u = χ z1`, `ε z(0) = y(0)`. Writing
//! `Λ z0 = -y_u(0)` for the state driven by `u = χ z1(z0)` from zero
//! terminal data, this becomes `(εI + Λ) z0 = y_free(0)`, solved by CG in
//! the `h`-weighted inner product.

use crate::adjoint::solve_adjoint;
use crate::backward::{solve_backward_transpose, BackwardTrajectory, ControlField};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SubdomainMask};
use crate::linalg::conjugate_gradient;
use crate::model::CascadeCoefficients;
use crate::scalar::{cst, dot, Real};
use crate::tree::{level_mean_of, AdaptedField, ScenarioTree};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_CG_TOL: f64 = 1e-10;
pub const DEFAULT_CG_MAX_ITER: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for CgOptions<T> {
    fn default() -> Self {
        Self { tol: cst(DEFAULT_CG_TOL), max_iter: DEFAULT_CG_MAX_ITER }
    }
}

#[derive(Clone, Debug)]
pub struct HumResult<T> {
    pub control: ControlField<T>,
    pub z0: Vec<T>,
    pub trajectory: BackwardTrajectory<T>,
    /// `E|y(0)|^2_h`.
    pub residual: T,
    /// `sum_m dt E|u_m|^2_h`.
    pub cost: T,
    pub cg_iterations: usize,
    pub cg_relative_residual: T,
    pub cg_tol: T,
    pub epsilon: T,
    /// `|y_free(0)|_h`.
    pub free_norm: T,
    /// `|y(0) - ε z0|_h`, the defect of the optimality relation.
    pub optimality_defect: T,
}

/// `Λ z0`: adjoint solve, observe `χ z1`, transpose backward solve from zero
/// terminal data, negate `y(0)`.
pub fn apply_gramian<T: Real>(
    z0: &[T],
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    control: &SubdomainMask,
) -> Result<Vec<T>> {
    let adj = solve_adjoint(z0, coeffs, tree, grid, None)?;
    let u = ControlField::from_adjoint(&adj, control)?;
    let zero = AdaptedField::deterministic(tree.depth(), vec![T::zero(); z0.len()]);
    let back = solve_backward_transpose(&zero, &u, coeffs, tree, grid)?;
    Ok(back.initial().iter().map(|&v| -v).collect())
}

/// Observation form `sum_m dt E<χ z1, z1'>_h` evaluated by direct quadrature
/// of two adjoint trajectories.
pub fn observation_form<T: Real>(
    a: &[T],
    b: &[T],
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    control: &SubdomainMask,
) -> Result<T> {
    let za = ControlField::from_adjoint(&solve_adjoint(a, coeffs, tree, grid, None)?, control)?;
    let zb = ControlField::from_adjoint(&solve_adjoint(b, coeffs, tree, grid, None)?, control)?;
    let nx = grid.nx();
    let mut total = T::zero();
    for m in 0..tree.depth() {
        let pa = za.field().level(m)?;
        let pb = zb.field().level(m)?;
        total = total + tree.dt() * grid.h() * crate::tree::level_mean_of_pair(pa, nx, pb, nx, m, |x, y| dot(x, y));
    }
    Ok(total)
}

/// Solves the penalized problem for terminal data `y_terminal` (level `M`).
#[allow(clippy::too_many_arguments)]
pub fn synthesize_control<T: Real>(
    y_terminal: &AdaptedField<T>,
    epsilon: T,
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    control: &SubdomainMask,
    options: CgOptions<T>,
) -> Result<HumResult<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(options.tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("CG tolerance must be positive, got {}", options.tol)));
    }
    let h = grid.h();
    let depth = tree.depth();
    let inner = |a: &[T], b: &[T]| h * dot(a, b);
    let free = solve_backward_transpose(y_terminal, &ControlField::zeros(grid.nx(), depth), coeffs, tree, grid)?;
    let rhs = free.initial().to_vec();
    let free_norm = inner(&rhs, &rhs).sqrt();

    let outcome = conjugate_gradient(
        |p| {
            let mut out = apply_gramian(p, coeffs, tree, grid, control)?;
            crate::scalar::axpy(epsilon, p, &mut out);
            Ok(out)
        },
        &rhs,
        inner,
        options.tol,
        options.max_iter,
    )?;
    let z0 = outcome.solution;
    let adj = solve_adjoint(&z0, coeffs, tree, grid, None)?;
    let u = ControlField::from_adjoint(&adj, control)?;
    let trajectory = solve_backward_transpose(y_terminal, &u, coeffs, tree, grid)?;
    let y0 = trajectory.initial();
    let residual = inner(y0, y0);
    let defect: Vec<T> = y0.iter().zip(&z0).map(|(&y, &z)| y - epsilon * z).collect();
    let optimality_defect = inner(&defect, &defect).sqrt();
    if optimality_defect > cst::<T>(10.0) * options.tol * free_norm {
        return Err(Error::NumericalFailure(format!(
            "optimality relation y(0) = eps z0 violated: defect {optimality_defect:e} > 10 * {:e} * {free_norm:e}",
            options.tol
        )));
    }
    let cost = u.cost(tree, grid);
    Ok(HumResult {
        control: u,
        z0,
        trajectory,
        residual,
        cost,
        cg_iterations: outcome.iterations,
        cg_relative_residual: outcome.relative_residual,
        cg_tol: options.tol,
        epsilon,
        free_norm,
        optimality_defect,
    })
}

/// `E|f|^2_h` on level `m` of a field.
pub fn mean_square<T: Real>(field: &AdaptedField<T>, m: usize, grid: &Grid1D<T>) -> Result<T> {
    let h = grid.h();
    Ok(level_mean_of(field.level(m)?, m, field.dim(), |v| h * dot(v, v)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformEstimateReport<T> {
    /// `cost + (2/ε) residual`.
    pub lhs: T,
    /// `C_obs E|yT|^2`.
    pub rhs: T,
    /// `1 + 10 cg_tol`.
    pub slack: T,
    pub pass: bool,
}

/// Checks `cost + (2/ε) E|y(0)|^2 <= C_obs E|yT|^2 (1 + 10 cg_tol)`.
pub fn certify_uniform_estimate<T: Real>(
    result: &HumResult<T>,
    c_obs: T,
    terminal_norm_sq: T,
) -> UniformEstimateReport<T> {
    let lhs = result.cost + cst::<T>(2.0) / result.epsilon * result.residual;
    let rhs = c_obs * terminal_norm_sq;
    let slack = T::one() + cst::<T>(10.0) * result.cg_tol;
    UniformEstimateReport { lhs, rhs, slack, pass: lhs <= rhs * slack }
}
