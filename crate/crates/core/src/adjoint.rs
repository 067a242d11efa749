//! Forward adjoint system on the scenario tree,
//! `dz - L z dt = (-A^* z + div(C^* z) + F0 + div F) dt + (-B^* z + F1) dW`.
//!
//! One step from level `m` to `m + 1` at each node:
//!
//! 1. drift: `z~ = z_m + dt (-A^* z_m + D(C^* z_m) + F0 + D F)` with
//!    coefficients at `t_m`;
//! 2. diffusion: `(I - dt L(t_{m+1})) z- = z~`, one tridiagonal solve per
//!    component;
//! 3. noise: `z_{m+1} = z- ± sqrt(dt) (-B^*(t_m) z_m + F1)` on the two
//!    child edges.
//!
//! The step is affine in `(z_m, dW)`, which is what the transposed backward
//! scheme relies on.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{add_gradient, Grid1D};
use crate::model::CascadeCoefficients;
use crate::ops::{ImplicitDiffusion, LevelTerms};
use crate::scalar::{all_finite, Real};
use crate::tree::{level_mean_of, per_node_len, AdaptedField, LevelValues, ScenarioTree};

/// Optional source terms `F0`, `F` (flux, differentiated) and `F1`, each an
/// adapted field of dimension `n * N_x` on levels `0..M-1`.
#[derive(Clone, Debug, Default)]
pub struct AdjointSources<T> {
    pub f0: Option<AdaptedField<T>>,
    pub flux: Option<AdaptedField<T>>,
    pub f1: Option<AdaptedField<T>>,
}

impl<T: Real> AdjointSources<T> {
    fn check(&self, dim: usize, depth: usize) -> Result<()> {
        for (name, f) in [("F0", &self.f0), ("F", &self.flux), ("F1", &self.f1)] {
            if let Some(f) = f {
                if f.dim() != dim || f.first_level() != 0 || f.last_level() + 1 < depth {
                    return Err(Error::InvalidArgument(format!(
                        "source {name} must have dimension {dim} on levels 0..{}",
                        depth - 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn uniform_at(&self, m: usize) -> bool {
        [&self.f0, &self.flux, &self.f1].iter().all(|f| f.as_ref().is_none_or(|f| f.is_uniform(m)))
    }
}

/// Solution `z` of the adjoint system on levels `0..=M`.
#[derive(Clone, Debug)]
pub struct AdjointTrajectory<T> {
    field: AdaptedField<T>,
    n: usize,
    nx: usize,
    dt: T,
}

impl<T: Real> AdjointTrajectory<T> {
    pub fn field(&self) -> &AdaptedField<T> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn scheme(&self) -> &'static str {
        "semi-implicit-euler"
    }

    pub fn depth(&self) -> usize {
        self.field.last_level()
    }

    /// Full state at node `(m, k)`.
    pub fn node(&self, m: usize, k: usize) -> &[T] {
        self.field.node(m, k)
    }

    /// Component `i` at node `(m, k)`.
    pub fn component(&self, m: usize, k: usize, i: usize) -> &[T] {
        &self.field.node(m, k)[i * self.nx..(i + 1) * self.nx]
    }

    pub fn initial(&self) -> &[T] {
        self.field.node(0, 0)
    }
}

struct StepContext<'a, T> {
    terms: LevelTerms<T>,
    diffusion: ImplicitDiffusion<T>,
    sources: Option<&'a AdjointSources<T>>,
    dt: T,
    h: T,
    nx: usize,
}

impl<T: Real> StepContext<'_, T> {
    /// Returns the post-diffusion state and the noise loading at node `(m, k)`.
    fn node_step(&self, m: usize, k: usize, z: &[T], mean: &mut [T], loading: &mut [T]) {
        self.terms.adjoint_drift_step(z, self.dt, mean);
        if let Some(src) = self.sources {
            if let Some(f0) = &src.f0 {
                crate::scalar::axpy(self.dt, f0.node(m, k), mean);
            }
            if let Some(flux) = &src.flux {
                for (blk, f) in mean.chunks_exact_mut(self.nx).zip(flux.node(m, k).chunks_exact(self.nx)) {
                    add_gradient(f, self.h, self.dt, blk);
                }
            }
        }
        self.diffusion.solve_in_place(mean);
        self.terms.adjoint_noise(z, loading);
        if let Some(f1) = self.sources.and_then(|s| s.f1.as_ref()) {
            crate::scalar::axpy(T::one(), f1.node(m, k), loading);
        }
    }
}

/// Solves the adjoint system from the deterministic initial state `z0`.
pub fn solve_adjoint<T: Real>(
    z0: &[T],
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    sources: Option<&AdjointSources<T>>,
) -> Result<AdjointTrajectory<T>> {
    let (n, nx, depth) = (coeffs.n(), grid.nx(), tree.depth());
    let dim = n * nx;
    if z0.len() != dim {
        return Err(Error::DimensionMismatch { context: "adjoint initial state", expected: dim, actual: z0.len() });
    }
    if !all_finite(z0) {
        return Err(Error::NumericalBlowup { stage: "adjoint initial state", level: 0 });
    }
    coeffs.check_discretization(grid, tree)?;
    if let Some(s) = sources {
        s.check(dim, depth)?;
    }
    let dt = tree.dt();
    let sqrt_dt = tree.sqrt_dt();
    let mut field = AdaptedField::zeros(dim, 0, depth);
    field.set_level(0, LevelValues::Uniform(z0.to_vec()));

    let mut mean = vec![T::zero(); dim];
    let mut loading = vec![T::zero(); dim];
    for m in 0..depth {
        let ctx = StepContext {
            terms: LevelTerms::new(coeffs, m, grid),
            diffusion: ImplicitDiffusion::new(coeffs, m + 1, dt, grid)?,
            sources,
            dt,
            h: grid.h(),
            nx,
        };
        let parent = field.level(m)?;
        let uniform_inputs = parent.is_uniform() && sources.is_none_or(|s| s.uniform_at(m));
        let next = if uniform_inputs {
            ctx.node_step(m, 0, parent.node(0, dim), &mut mean, &mut loading);
            if loading.iter().all(|&v| v == T::zero()) {
                LevelValues::Uniform(mean.clone())
            } else {
                let mut out = vec![T::zero(); per_node_len(m + 1, dim)?];
                for pair in out.chunks_exact_mut(2 * dim) {
                    write_children(pair, &mean, &loading, sqrt_dt);
                }
                LevelValues::PerNode(out)
            }
        } else {
            let mut out = vec![T::zero(); per_node_len(m + 1, dim)?];
            out.par_chunks_exact_mut(2 * dim).enumerate().for_each_init(
                || (vec![T::zero(); dim], vec![T::zero(); dim]),
                |(mean, loading), (k, pair)| {
                    ctx.node_step(m, k, parent.node(k, dim), mean, loading);
                    write_children(pair, mean, loading, sqrt_dt);
                },
            );
            LevelValues::PerNode(out)
        };
        if !next.is_finite() {
            return Err(Error::NumericalBlowup { stage: "adjoint", level: m + 1 });
        }
        field.set_level(m + 1, next);
    }
    Ok(AdjointTrajectory { field, n, nx, dt })
}

fn write_children<T: Real>(pair: &mut [T], mean: &[T], loading: &[T], sqrt_dt: T) {
    let (up, down) = pair.split_at_mut(mean.len());
    for (((u, d), &c), &s) in up.iter_mut().zip(down.iter_mut()).zip(mean).zip(loading) {
        *u = c + sqrt_dt * s;
        *d = c - sqrt_dt * s;
    }
}

/// `E sum_i |z_i(t_m)|^2_{L^2}` for every level `m`.
pub fn energy_history<T: Real>(traj: &AdjointTrajectory<T>, grid: &Grid1D<T>) -> Vec<T> {
    let dim = traj.field.dim();
    let h = grid.h();
    traj.field.levels().map(|(m, values)| level_mean_of(values, m, dim, |v| h * crate::scalar::dot(v, v))).collect()
}

/// Empirical energy growth versus the Gronwall scale.
#[derive(Clone, Debug, PartialEq)]
pub struct GronwallReport<T> {
    /// `c* = max_m ln(E|z(T)|^2 / E|z(t_m)|^2) / (T - t_m)`; `None` when undefined.
    pub growth: Option<T>,
    /// `K_g = 1 + max_{i<=j}(|a_ij| + |C_ij|^2 + |b_ij|^2)`.
    pub bound: T,
    /// Constant `C_fit` the check was run with.
    pub fit_constant: T,
    /// `max(c*, 0) / K_g`, the smallest constant that would pass.
    pub fitted: Option<T>,
    pub pass: bool,
    pub undefined_ratio: bool,
}

/// Compares the empirical energy growth rate with `C_fit * K_g`.
pub fn check_gronwall<T: Real>(
    traj: &AdjointTrajectory<T>,
    coeffs: &CascadeCoefficients<T>,
    grid: &Grid1D<T>,
    tree: &ScenarioTree<T>,
    fit_constant: T,
) -> GronwallReport<T> {
    let energy = energy_history(traj, grid);
    let bound = coeffs.growth_bound();
    let depth = tree.depth();
    let terminal = energy[depth];
    let mut growth: Option<T> = None;
    if terminal > T::zero() {
        for (m, &e) in energy.iter().enumerate().take(depth) {
            if e > T::zero() {
                let rate = (terminal / e).ln() / (tree.horizon() - tree.time(m));
                growth = Some(growth.map_or(rate, |g| g.max(rate)));
            }
        }
    }
    match growth {
        Some(g) => GronwallReport {
            growth: Some(g),
            bound,
            fit_constant,
            fitted: Some(g.max(T::zero()) / bound),
            pass: g <= fit_constant * bound,
            undefined_ratio: false,
        },
        None => GronwallReport { growth: None, bound, fit_constant, fitted: None, pass: false, undefined_ratio: true },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoefficientField;
    use std::f64::consts::PI;

    fn setup(depth: usize, nx: usize) -> (ScenarioTree<f64>, Grid1D<f64>) {
        (ScenarioTree::new(depth, 1.0).unwrap(), Grid1D::new(nx).unwrap())
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let (tree, grid) = setup(6, 15);
        let c = CascadeCoefficients::new(2).unwrap().with_reaction(1, 0, CoefficientField::Constant(1.0)).with_noise(
            0,
            0,
            CoefficientField::Constant(0.7),
        );
        let traj = solve_adjoint(&vec![0.0; 30], &c, &tree, &grid, None).unwrap();
        assert_eq!(traj.field().max_abs(), 0.0);
        assert!(energy_history(&traj, &grid).iter().all(|&e| e == 0.0));
        let report = check_gronwall(&traj, &c, &grid, &tree, 2.0);
        assert!(report.undefined_ratio);
    }

    #[test]
    fn heat_mode_decays_by_implicit_euler_factor() {
        let (tree, grid) = setup(10, 31);
        let c = CascadeCoefficients::<f64>::new(1).unwrap();
        let z0 = grid.sample(|x| (PI * x).sin());
        let traj = solve_adjoint(&z0, &c, &tree, &grid, None).unwrap();
        let h = grid.h();
        let lam = (2.0 / (h * h)) * (1.0 - (PI * h).cos());
        let factor = 1.0 / (1.0 + tree.dt() * lam);
        for m in 0..=10 {
            assert!(traj.field().is_uniform(m));
            let expected = factor.powi(m as i32);
            for (v, s) in traj.node(m, 0).iter().zip(&z0) {
                assert!((v - expected * s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn path_product_without_diffusion() {
        let (tree, grid) = setup(5, 7);
        let b = 0.8;
        let c =
            CascadeCoefficients::new(1).unwrap().with_noise(0, 0, CoefficientField::Constant(b)).without_diffusion();
        let z0 = grid.sample(|x| 1.0 + x);
        let traj = solve_adjoint(&z0, &c, &tree, &grid, None).unwrap();
        for leaf in 0..tree.nodes_at(5) {
            // bits of the leaf index from the root: 0 = up, 1 = down
            let mut factor = 1.0;
            for level in 1..=5 {
                let child = leaf >> (5 - level);
                factor *= 1.0 - b * tree.increment(child);
            }
            for (v, s) in traj.node(5, leaf).iter().zip(&z0) {
                assert!((v - factor * s).abs() < 1e-12 * factor.abs().max(1.0));
            }
        }
    }

    #[test]
    fn noise_stage_has_zero_conditional_mean() {
        let (tree, grid) = setup(4, 9);
        let c = CascadeCoefficients::new(2)
            .unwrap()
            .with_reaction(1, 0, CoefficientField::Constant(1.0))
            .with_noise(0, 0, CoefficientField::Constant(0.6))
            .with_noise(0, 1, CoefficientField::Constant(-0.4))
            .with_noise(1, 1, CoefficientField::Constant(0.3));
        let z0: Vec<f64> = (0..18).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
        let traj = solve_adjoint(&z0, &c, &tree, &grid, None).unwrap();
        // recompute the drift + diffusion stage independently at level 2
        let terms = LevelTerms::new(&c, 2, &grid);
        let diff = ImplicitDiffusion::new(&c, 3, tree.dt(), &grid).unwrap();
        for k in 0..tree.nodes_at(2) {
            let mut mean = vec![0.0; 18];
            terms.adjoint_drift_step(traj.node(2, k), tree.dt(), &mut mean);
            diff.solve_in_place(&mut mean);
            let (up, down) = (traj.node(3, 2 * k), traj.node(3, 2 * k + 1));
            for j in 0..18 {
                assert!((0.5 * (up[j] + down[j]) - mean[j]).abs() <= 1e-15 * mean[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_wrong_initial_length() {
        let (tree, grid) = setup(3, 5);
        let c = CascadeCoefficients::<f64>::new(2).unwrap();
        assert!(matches!(solve_adjoint(&[0.0; 5], &c, &tree, &grid, None), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(solve_adjoint(&[f64::NAN; 10], &c, &tree, &grid, None), Err(Error::NumericalBlowup { .. })));
    }

    #[test]
    fn decay_without_potentials_passes_gronwall() {
        let (tree, grid) = setup(8, 15);
        let c = CascadeCoefficients::<f64>::new(1).unwrap();
        let z0 = grid.sample(|x| x * (1.0 - x) * (5.0 * x).cos());
        let traj = solve_adjoint(&z0, &c, &tree, &grid, None).unwrap();
        let r = check_gronwall(&traj, &c, &grid, &tree, 2.0);
        assert!(r.growth.unwrap() <= 0.0);
        assert!(r.pass);
    }

    #[test]
    fn reaction_only_gronwall_report() {
        let (tree, grid) = setup(8, 15);
        let c = CascadeCoefficients::new(1).unwrap().with_reaction(0, 0, CoefficientField::Constant(5.0));
        let z0 = grid.sample(|x| (PI * x).sin());
        let traj = solve_adjoint(&z0, &c, &tree, &grid, None).unwrap();
        let r = check_gronwall(&traj, &c, &grid, &tree, 2.0);
        assert_eq!(r.bound, 6.0);
        assert!(r.pass);
        assert!(r.fitted.unwrap() >= 0.0);
    }
}
