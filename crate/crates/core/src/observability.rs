//! Dense observation and terminal forms, the numerical observability
//! constant, a unique-continuation probe and cost-versus-horizon sweeps.
//!
//! Both matrices are stored in operator form with respect to `<·,·>_h`:
//! `<Λ a, b>_h = sum_m dt E<χ z1^a, z1^b>_h` and `<N a, b>_h = E<z^a(T), z^b(T)>_h`.
//! Since `h` is a common scalar factor both are symmetric as plain matrices,
//! and the generalized eigenvalues of `N v = μ Λ v` do not depend on it.

use rayon::prelude::*;

use crate::adjoint::solve_adjoint;
use crate::backward::{solve_backward_transpose, ControlField};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SubdomainMask};
use crate::linalg::{symmetric_eigen, DenseMatrix, SymmetricEigen};
use crate::model::{compute_k, CascadeCoefficients};
use crate::scalar::{dot, Real};
use crate::tree::{level_mean_of_pair, AdaptedField, ScenarioTree};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = crate::linalg::jacobi::DEFAULT_MAX_SWEEPS;

#[derive(Clone, Debug)]
pub struct GramianMatrix<T> {
    /// Observation form `Λ`.
    pub observation: DenseMatrix<T>,
    /// Terminal form `N`.
    pub terminal: DenseMatrix<T>,
    /// `max |Λ_ij - Λ_ji| / max |Λ_ij|` before symmetrization.
    pub asymmetry: T,
    /// Smallest eigenvalue of `Λ` divided by `‖Λ‖_2`.
    pub min_relative_eigenvalue: T,
    /// Eigendecomposition of the symmetrized `Λ`.
    pub spectrum: SymmetricEigen<T>,
}

impl<T: Real> GramianMatrix<T> {
    pub fn order(&self) -> usize {
        self.observation.order()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.asymmetry <= tol
    }

    pub fn is_psd(&self, tol: T) -> bool {
        self.min_relative_eigenvalue >= -tol
    }
}

/// Assembles `Λ` column by column (one adjoint plus one transposed backward
/// solve per basis vector) and `N` from the same adjoint solves.
pub fn assemble_gramian<T: Real>(
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    control: &SubdomainMask,
) -> Result<GramianMatrix<T>> {
    let dim = coeffs.n() * grid.nx();
    let depth = tree.depth();
    let zero_terminal = AdaptedField::deterministic(depth, vec![T::zero(); dim]);
    let columns: Vec<(Vec<T>, AdaptedField<T>)> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let mut e = vec![T::zero(); dim];
            e[i] = T::one();
            let adj = solve_adjoint(&e, coeffs, tree, grid, None)?;
            let u = ControlField::from_adjoint(&adj, control)?;
            let back = solve_backward_transpose(&zero_terminal, &u, coeffs, tree, grid)?;
            let column = back.initial().iter().map(|&v| -v).collect();
            let terminal = AdaptedField::from_levels(dim, depth, vec![adj.field().level(depth)?.clone()])?;
            Ok((column, terminal))
        })
        .collect::<Result<Vec<_>>>()?;

    let raw = DenseMatrix::from_columns(&columns.iter().map(|c| c.0.clone()).collect::<Vec<_>>());
    let scale = raw.max_abs();
    let asymmetry = if scale > T::zero() { raw.asymmetry() / scale } else { T::zero() };
    let observation = raw.symmetrized();

    let entries: Vec<(usize, usize, T)> = (0..dim)
        .into_par_iter()
        .flat_map_iter(|i| {
            let columns = &columns;
            (i..dim).map(move |j| {
                let (a, b) = (&columns[i].1, &columns[j].1);
                let v = level_mean_of_pair(
                    a.level(depth).expect("terminal level"),
                    dim,
                    b.level(depth).expect("terminal level"),
                    dim,
                    depth,
                    |x, y| dot(x, y),
                );
                (i, j, v)
            })
        })
        .collect();
    let mut terminal = DenseMatrix::zeros(dim);
    for (i, j, v) in entries {
        terminal.set(i, j, v);
        terminal.set(j, i, v);
    }

    let spectrum = symmetric_eigen(&observation, MAX_SWEEPS)?;
    let top = spectrum.values.last().copied().unwrap_or(T::zero()).abs();
    let bottom = spectrum.values.first().copied().unwrap_or(T::zero());
    let min_relative_eigenvalue = if top > T::zero() { bottom / top } else { T::zero() };
    Ok(GramianMatrix { observation, terminal, asymmetry, min_relative_eigenvalue, spectrum })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport<T> {
    pub lambda_max: T,
    pub lambda_min: T,
    /// Eigenvalues of `Λ` above `rank_tol * lambda_max`.
    pub rank: usize,
    pub discarded: usize,
    pub rank_tol: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observability<T> {
    Observable { c_obs: T, spectrum: SpectrumReport<T> },
    NotObservable { witness: Vec<T>, energy: T, spectrum: SpectrumReport<T> },
}

impl<T: Real> Observability<T> {
    pub fn constant(&self) -> Option<T> {
        match self {
            Observability::Observable { c_obs, .. } => Some(*c_obs),
            Observability::NotObservable { .. } => None,
        }
    }

    pub fn spectrum(&self) -> &SpectrumReport<T> {
        match self {
            Observability::Observable { spectrum, .. } | Observability::NotObservable { spectrum, .. } => spectrum,
        }
    }
}

/// Range/kernel split of `Λ` at relative threshold `rank_tol`.
struct Split<T> {
    range: Vec<(T, Vec<T>)>,
    kernel: Vec<Vec<T>>,
    report: SpectrumReport<T>,
}

fn split<T: Real>(gram: &GramianMatrix<T>, rank_tol: T) -> Split<T> {
    let spec = &gram.spectrum;
    let lambda_max = spec.values.last().copied().unwrap_or(T::zero());
    let cutoff = rank_tol * lambda_max;
    let mut range = Vec::new();
    let mut kernel = Vec::new();
    for (value, vector) in spec.values.iter().zip(&spec.vectors) {
        if lambda_max > T::zero() && *value > cutoff {
            range.push((*value, vector.clone()));
        } else {
            kernel.push(vector.clone());
        }
    }
    let report = SpectrumReport {
        lambda_max,
        lambda_min: spec.values.first().copied().unwrap_or(T::zero()),
        rank: range.len(),
        discarded: kernel.len(),
        rank_tol,
    };
    Split { range, kernel, report }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniqueContinuationReport<T> {
    /// `kernel(Λ) ⊆ kernel(N)` at the given tolerance.
    pub pass: bool,
    pub kernel_dim: usize,
    /// Largest terminal energy `E|z(T)|^2_h / |z0|^2_h` over the numerical
    /// kernel of `Λ`.
    pub max_energy: T,
    pub witness: Option<Vec<T>>,
    pub rank_tol: T,
}

/// Largest terminal energy per unit initial energy carried by the numerical
/// kernel of `Λ`; unique continuation holds when it is at most `rank_tol`.
pub fn unique_continuation_probe<T: Real>(gram: &GramianMatrix<T>, rank_tol: T) -> Result<UniqueContinuationReport<T>> {
    let parts = split(gram, rank_tol);
    probe_kernel(gram, &parts.kernel, rank_tol)
}

fn probe_kernel<T: Real>(
    gram: &GramianMatrix<T>,
    kernel: &[Vec<T>],
    rank_tol: T,
) -> Result<UniqueContinuationReport<T>> {
    if kernel.is_empty() {
        return Ok(UniqueContinuationReport {
            pass: true,
            kernel_dim: 0,
            max_energy: T::zero(),
            witness: None,
            rank_tol,
        });
    }
    // kernel vectors are orthonormal, so these eigenvalues are Rayleigh
    // quotients <N v, v>_h / <v, v>_h
    let restricted = symmetric_eigen(&gram.terminal.congruence(kernel), MAX_SWEEPS)?;
    let top = restricted.values.len() - 1;
    let energy = restricted.values[top].max(T::zero());
    let pass = energy <= rank_tol;
    let witness = (!pass).then(|| combine(kernel, &restricted.vectors[top]));
    Ok(UniqueContinuationReport { pass, kernel_dim: kernel.len(), max_energy: energy, witness, rank_tol })
}

fn combine<T: Real>(basis: &[Vec<T>], coefficients: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); basis[0].len()];
    for (b, &c) in basis.iter().zip(coefficients) {
        crate::scalar::axpy(c, b, &mut out);
    }
    out
}

/// Largest generalized eigenvalue of `N v = μ Λ v` on the numerical range of
/// `Λ`, or a witness when the kernel of `Λ` carries terminal energy.
pub fn estimate_observability_constant<T: Real>(gram: &GramianMatrix<T>, rank_tol: T) -> Result<Observability<T>> {
    let parts = split(gram, rank_tol);
    let uc = probe_kernel(gram, &parts.kernel, rank_tol)?;
    if let Some(witness) = uc.witness {
        return Ok(Observability::NotObservable { witness, energy: uc.max_energy, spectrum: parts.report });
    }
    if parts.range.is_empty() {
        return Ok(Observability::Observable { c_obs: T::zero(), spectrum: parts.report });
    }
    let whitened: Vec<Vec<T>> = parts
        .range
        .iter()
        .map(|(value, vector)| {
            let s = value.sqrt().recip();
            vector.iter().map(|&x| x * s).collect()
        })
        .collect();
    let reduced = symmetric_eigen(&gram.terminal.congruence(&whitened), MAX_SWEEPS)?;
    let c_obs = reduced.values.last().copied().unwrap_or(T::zero()).max(T::zero());
    Ok(Observability::Observable { c_obs, spectrum: parts.report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostSweepRow<T> {
    pub horizon: T,
    /// `None` when the discrete system is not observable at this horizon.
    pub c_obs: Option<T>,
    pub k: T,
    pub log_c: Option<T>,
    /// `max_rows log(C_obs) / K(T)` over the whole sweep.
    pub c0_fit: Option<T>,
}

/// Rebuilds the tree for every horizon, assembles and estimates.
pub fn cost_sweep<T: Real>(
    horizons: &[T],
    coeffs: &CascadeCoefficients<T>,
    depth: usize,
    grid: &Grid1D<T>,
    control: &SubdomainMask,
    rank_tol: T,
) -> Result<Vec<CostSweepRow<T>>> {
    let mut rows = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        if !(horizon > T::zero()) {
            return Err(Error::InvalidArgument(format!("sweep horizon must be positive, got {horizon}")));
        }
        let tree = ScenarioTree::new(depth, horizon)?;
        let gram = assemble_gramian(coeffs, &tree, grid, control)?;
        let c_obs = estimate_observability_constant(&gram, rank_tol)?.constant();
        let k = compute_k(coeffs, horizon)?;
        rows.push(CostSweepRow { horizon, c_obs, k, log_c: c_obs.map(|c| c.ln()), c0_fit: None });
    }
    let fit = rows
        .iter()
        .filter_map(|r| r.log_c.map(|l| l / r.k))
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))));
    for row in &mut rows {
        row.c0_fit = fit;
    }
    Ok(rows)
}

/// `E|z(T)|^2 / sum_m dt E|χ z1|^2` for one initial state: a lower bound on
/// the observability constant.
pub fn rayleigh_ratio<T: Real>(gram: &GramianMatrix<T>, z0: &[T]) -> T {
    gram.terminal.bilinear(z0, z0) / gram.observation.bilinear(z0, z0)
}

/// Relative size of `Λ` outside the block of the first component.
pub fn off_block_ratio<T: Real>(gram: &GramianMatrix<T>, nx: usize) -> T {
    let order = gram.order();
    let scale = gram.observation.max_abs();
    if scale == T::zero() {
        return T::zero();
    }
    let mut worst = T::zero();
    for i in 0..order {
        for j in 0..order {
            if i >= nx || j >= nx {
                worst = worst.max(gram.observation.get(i, j).abs());
            }
        }
    }
    worst / scale
}
