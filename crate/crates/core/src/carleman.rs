//! Carleman weights and weighted functionals.
//!
//! `ψ(x) = 4x(1-x)`, `α = (e^{μψ} - e^{2μ|ψ|∞}) / (t(T-t))`,
//! `γ = 1 / (t(T-t))`, `θ = e^{λα}`, all on the interior levels `1..M-1`.
//!
//! `θ²` routinely underflows (`λα` reaches `-10^4`), so every weighted
//! integral is accumulated as a logarithm with log-sum-exp; ratios are taken
//! between logarithms and only final values are exponentiated, flushing
//! anything below `1e-300` to zero.

use rayon::prelude::*;

use crate::adjoint::{solve_adjoint, AdjointSources, AdjointTrajectory};
use crate::error::{Error, Result};
use crate::grid::{gradient_into, Grid1D, SubdomainMask};
use crate::model::CascadeCoefficients;
use crate::scalar::{cst, from_usize, Real};
use crate::tree::{AdaptedField, LevelValues, ScenarioTree};

pub const DEFAULT_MU: f64 = 2.0;
pub const DEFAULT_SAMPLES: usize = 10;
/// Values below this are reported as zero when leaving log space.
pub const UNDERFLOW: f64 = 1e-300;

/// `ln` of a nonnegative quantity; `-inf` encodes zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue<T>(pub T);

impl<T: Real> LogValue<T> {
    pub fn zero() -> Self {
        LogValue(T::neg_infinity())
    }

    pub fn ln(self) -> T {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == T::neg_infinity()
    }

    /// `exp`, flushed to zero below [`UNDERFLOW`].
    pub fn value(self) -> T {
        if self.0 < cst::<T>(UNDERFLOW).ln() {
            T::zero()
        } else {
            self.0.exp()
        }
    }

    pub fn log_add(self, other: Self) -> Self {
        let (hi, lo) = if self.0 >= other.0 { (self.0, other.0) } else { (other.0, self.0) };
        if hi == T::neg_infinity() {
            return self;
        }
        LogValue(hi + (lo - hi).exp().ln_1p())
    }

    /// `self / other` in log space: `+inf` when only the denominator vanishes,
    /// `None` when both do.
    pub fn ratio(self, other: Self) -> Option<T> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => None,
            (false, true) => Some(T::infinity()),
            _ => Some((self.0 - other.0).exp()),
        }
    }
}

/// `ψ(x) = 4x(1-x)` at the grid points. The only critical point of `ψ` is
/// `x = 1/2`, which must lie within one cell of a point of `G1`.
pub fn build_psi<T: Real>(grid: &Grid1D<T>, weight: &SubdomainMask) -> Result<Vec<T>> {
    let half = cst::<T>(0.5);
    let h = grid.h();
    if weight.len() != grid.nx() {
        return Err(Error::DimensionMismatch { context: "weight mask", expected: grid.nx(), actual: weight.len() });
    }
    if !weight.indices().iter().any(|&j| (grid.x(j) - half).abs() <= h) {
        return Err(Error::UnsupportedGeometry("the weight region must contain x = 1/2".into()));
    }
    let four = cst::<T>(4.0);
    let psi = grid.sample(|x| four * x * (T::one() - x));
    for j in 0..grid.nx() {
        if !weight.contains(j) && psi_derivative(grid.x(j)) == T::zero() {
            return Err(Error::UnsupportedGeometry(format!(
                "psi has a critical point at x_{j} outside the weight region"
            )));
        }
    }
    Ok(psi)
}

/// `ψ'(x) = 4 - 8x`.
pub fn psi_derivative<T: Real>(x: T) -> T {
    cst::<T>(4.0) - cst::<T>(8.0) * x
}

/// `t(T-t)` written as `T²/4 - (t - T/2)²` so that `γ >= 4/T²` holds exactly.
fn time_weight<T: Real>(t: T, horizon: T) -> T {
    let c = t - horizon * cst(0.5);
    horizon * horizon / cst(4.0) - c * c
}

#[derive(Clone, Debug)]
pub struct CarlemanWeights<T> {
    pub mu: T,
    pub lambda: T,
    pub horizon: T,
    pub depth: usize,
    pub psi: Vec<T>,
    pub psi_sup: T,
    /// `γ(t_m)` for `m = 1..M-1` (index `m - 1`).
    gamma: Vec<T>,
    /// `α(t_m, x_j)`, level-major.
    alpha: Vec<T>,
}

/// Weights for the given `λ, μ >= 1` on the interior levels of `tree`.
pub fn eval_weights<T: Real>(
    lambda: T,
    mu: T,
    psi: &[T],
    grid: &Grid1D<T>,
    tree: &ScenarioTree<T>,
) -> Result<CarlemanWeights<T>> {
    if !(lambda >= T::one()) || !(mu >= T::one()) {
        return Err(Error::InvalidArgument(format!("lambda and mu must be at least 1, got {lambda} and {mu}")));
    }
    if psi.len() != grid.nx() {
        return Err(Error::DimensionMismatch { context: "psi", expected: grid.nx(), actual: psi.len() });
    }
    let horizon = tree.horizon();
    let psi_sup = psi.iter().fold(T::zero(), |a, &p| a.max(p.abs()));
    let top = (cst::<T>(2.0) * mu * psi_sup).exp();
    let spatial: Vec<T> = psi.iter().map(|&p| (mu * p).exp() - top).collect();
    let depth = tree.depth();
    let mut gamma = Vec::with_capacity(depth.saturating_sub(1));
    let mut alpha = Vec::with_capacity(depth.saturating_sub(1) * psi.len());
    for m in 1..depth {
        let g = time_weight(tree.time(m), horizon).recip();
        gamma.push(g);
        alpha.extend(spatial.iter().map(|&s| s * g));
    }
    let weights = CarlemanWeights { mu, lambda, horizon, depth, psi: psi.to_vec(), psi_sup, gamma, alpha };
    debug_assert!(weights.alpha.iter().all(|&a| a < T::zero()));
    Ok(weights)
}

impl<T: Real> CarlemanWeights<T> {
    fn check_level(&self, m: usize) -> Result<usize> {
        if m == 0 || m >= self.depth {
            return Err(Error::OutOfDomain { level: m, depth: self.depth });
        }
        Ok(m - 1)
    }

    pub fn nx(&self) -> usize {
        self.psi.len()
    }

    pub fn gamma(&self, m: usize) -> Result<T> {
        Ok(self.gamma[self.check_level(m)?])
    }

    pub fn alpha(&self, m: usize, j: usize) -> Result<T> {
        Ok(self.alpha[self.check_level(m)? * self.nx() + j])
    }

    pub fn ln_theta(&self, m: usize, j: usize) -> Result<T> {
        Ok(self.lambda * self.alpha(m, j)?)
    }

    pub fn theta(&self, m: usize, j: usize) -> Result<T> {
        Ok(self.ln_theta(m, j)?.exp())
    }

    /// Same weights at a different `λ`.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        if !(lambda >= T::one()) {
            return Err(Error::InvalidArgument(format!("lambda must be at least 1, got {lambda}")));
        }
        Ok(Self { lambda, ..self.clone() })
    }

    /// Smallest `C` with `|α(t_{m+1}) - α(t_m)| / dt <= C T e^{2μ|ψ|∞} max(γ_m, γ_{m+1})²`
    /// over consecutive interior levels. The secant is a mean of `∂_t α` and
    /// `γ` is convex, so the exact bound `|∂_t α| <= T e^{2μ|ψ|∞} γ²` gives `C <= 1`.
    pub fn alpha_time_constant(&self, tree: &ScenarioTree<T>) -> Option<T> {
        let interior = self.depth.checked_sub(1)?;
        if interior < 2 {
            return None;
        }
        let nx = self.nx();
        let dt = tree.dt();
        let scale = self.horizon * (cst::<T>(2.0) * self.mu * self.psi_sup).exp();
        let mut worst = T::zero();
        for idx in 0..interior - 1 {
            let g = self.gamma[idx].max(self.gamma[idx + 1]);
            for j in 0..nx {
                let rate = (self.alpha[(idx + 1) * nx + j] - self.alpha[idx * nx + j]) / dt;
                worst = worst.max(rate.abs() / (scale * g * g));
            }
        }
        Some(worst)
    }
}

/// What a weighted integral integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrand {
    Value,
    Gradient,
}

/// `ln( λ^p E Σ_{m=1}^{M-1} dt Σ_j h θ² γ^q |f|² )` for the block of `field`
/// starting at `offset` (length `N_x`), optionally restricted to `mask`.
#[allow(clippy::too_many_arguments)]
pub fn weighted_integral<T: Real>(
    field: &AdaptedField<T>,
    offset: usize,
    integrand: Integrand,
    lambda_power: T,
    gamma_power: T,
    mask: Option<&SubdomainMask>,
    weights: &CarlemanWeights<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
) -> Result<LogValue<T>> {
    let nx = grid.nx();
    let dim = field.dim();
    if offset + nx > dim || weights.nx() != nx || weights.depth != tree.depth() {
        return Err(Error::InvalidArgument(
            "weighted integral: field and weights do not share the discretization".into(),
        ));
    }
    let h = grid.h();
    let base = (tree.dt() * h).ln() + lambda_power * weights.lambda.ln();
    let mut total = LogValue::zero();
    let mut scratch = vec![T::zero(); nx];
    for m in 1..tree.depth() {
        if !field.contains_level(m) {
            return Err(Error::LevelMismatch(format!("field does not cover interior level {m}")));
        }
        let second = nodal_second_moment(field.level(m)?, m, dim, offset, nx, integrand, h, &mut scratch);
        let g = weights.gamma(m)?;
        for (j, &s) in second.iter().enumerate() {
            if s == T::zero() || mask.is_some_and(|mk| !mk.contains(j)) {
                continue;
            }
            let term = base + s.ln() + cst::<T>(2.0) * weights.ln_theta(m, j)? + gamma_power * g.ln();
            total = total.log_add(LogValue(term));
        }
    }
    Ok(total)
}

/// `E[f_j²]` (or `E[(D f)_j²]`) at every grid point of one level.
#[allow(clippy::too_many_arguments)]
fn nodal_second_moment<T: Real>(
    values: &LevelValues<T>,
    m: usize,
    dim: usize,
    offset: usize,
    nx: usize,
    integrand: Integrand,
    h: T,
    scratch: &mut [T],
) -> Vec<T> {
    let nodes = if values.is_uniform() { 1 } else { 1usize << m };
    let weight = T::one() / from_usize::<T>(nodes);
    let mut acc = vec![T::zero(); nx];
    for k in 0..nodes {
        let block = &values.node(k, dim)[offset..offset + nx];
        let src = match integrand {
            Integrand::Value => block,
            Integrand::Gradient => {
                gradient_into(block, h, scratch);
                &*scratch
            }
        };
        for (a, &v) in acc.iter_mut().zip(src) {
            *a = *a + v * v;
        }
    }
    acc.iter_mut().for_each(|a| *a = *a * weight);
    acc
}

/// `I(d, f) = λ^d E∫θ²γ^d|f|² + λ^{d-2} E∫θ²γ^{d-2}|∇f|²` for a scalar field.
pub fn carleman_functional_i<T: Real>(
    d: T,
    component: &AdaptedField<T>,
    weights: &CarlemanWeights<T>,
    grid: &Grid1D<T>,
    tree: &ScenarioTree<T>,
) -> Result<T> {
    Ok(functional_i_ln(d, component, 0, weights, grid, tree)?.value())
}

/// Logarithm of [`carleman_functional_i`] for the block at `offset`.
pub fn functional_i_ln<T: Real>(
    d: T,
    field: &AdaptedField<T>,
    offset: usize,
    weights: &CarlemanWeights<T>,
    grid: &Grid1D<T>,
    tree: &ScenarioTree<T>,
) -> Result<LogValue<T>> {
    let two = cst::<T>(2.0);
    let value = weighted_integral(field, offset, Integrand::Value, d, d, None, weights, tree, grid)?;
    let grad = weighted_integral(field, offset, Integrand::Gradient, d - two, d - two, None, weights, tree, grid)?;
    Ok(value.log_add(grad))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanRow<T> {
    pub sample: usize,
    pub lambda: T,
    pub lhs: LogValue<T>,
    pub rhs: LogValue<T>,
    /// `LHS / RHS`; `+inf` marks a violation witness.
    pub ratio: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeCheck<T> {
    pub rows: Vec<CarlemanRow<T>>,
    /// Largest finite ratio, the empirical constant.
    pub max_ratio: Option<T>,
    /// Samples with `RHS = 0 < LHS`.
    pub violations: Vec<usize>,
    /// Samples with `LHS = RHS = 0`.
    pub skipped: Vec<usize>,
    pub l: T,
}

/// Default observation exponent `l = 3(n + 1)`.
pub fn default_l(n: usize) -> usize {
    3 * (n + 1)
}

/// LHS `Σ_i I(3(n+1-i), z_i)` versus `λ^l E∫_{G~0} θ²γ^l |z_1|²` for every
/// sample initial state.
#[allow(clippy::too_many_arguments)]
pub fn carleman_check_cascade<T: Real>(
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    weights: &CarlemanWeights<T>,
    l: T,
    samples: &[Vec<T>],
    observation: &SubdomainMask,
) -> Result<CascadeCheck<T>> {
    let trajectories = solve_samples(coeffs, tree, grid, samples)?;
    cascade_rows(coeffs.n(), &trajectories, tree, grid, weights, l, observation)
}

/// Runs [`carleman_check_cascade`] for several `λ`, solving each sample once.
#[allow(clippy::too_many_arguments)]
pub fn carleman_lambda_sweep<T: Real>(
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    base: &CarlemanWeights<T>,
    lambdas: &[T],
    l: T,
    samples: &[Vec<T>],
    observation: &SubdomainMask,
) -> Result<Vec<CascadeCheck<T>>> {
    let trajectories = solve_samples(coeffs, tree, grid, samples)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let weights = base.with_lambda(lambda)?;
            cascade_rows(coeffs.n(), &trajectories, tree, grid, &weights, l, observation)
        })
        .collect()
}

fn solve_samples<T: Real>(
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    samples: &[Vec<T>],
) -> Result<Vec<AdjointTrajectory<T>>> {
    samples.par_iter().map(|z0| solve_adjoint(z0, coeffs, tree, grid, None)).collect()
}

fn cascade_rows<T: Real>(
    n: usize,
    trajectories: &[AdjointTrajectory<T>],
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    weights: &CarlemanWeights<T>,
    l: T,
    observation: &SubdomainMask,
) -> Result<CascadeCheck<T>> {
    let nx = grid.nx();
    let rows = trajectories
        .par_iter()
        .enumerate()
        .map(|(sample, traj)| {
            let mut lhs = LogValue::zero();
            for i in 0..n {
                let d = from_usize::<T>(3 * (n - i));
                lhs = lhs.log_add(functional_i_ln(d, traj.field(), i * nx, weights, grid, tree)?);
            }
            let rhs =
                weighted_integral(traj.field(), 0, Integrand::Value, l, l, Some(observation), weights, tree, grid)?;
            Ok(CarlemanRow { sample, lambda: weights.lambda, lhs, rhs, ratio: lhs.ratio(rhs) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_ratio: Option<T> = None;
    let mut violations = Vec::new();
    let mut skipped = Vec::new();
    for row in &rows {
        match row.ratio {
            None => skipped.push(row.sample),
            Some(r) if r.is_infinite() => violations.push(row.sample),
            Some(r) => max_ratio = Some(max_ratio.map_or(r, |m| m.max(r))),
        }
    }
    Ok(CascadeCheck { rows, max_ratio, violations, skipped, l })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleCheck<T> {
    pub lhs: LogValue<T>,
    pub rhs: LogValue<T>,
    /// `[λ^d∫θ²γ^d z², λ^{d-2}∫θ²γ^{d-2}|∇z|², λ^d∫_O θ²γ^d z², λ^{d-3}∫θ²γ^{d-3}F0², λ^{d-1}∫θ²γ^{d-1}F1², λ^{d-1}∫θ²γ^{d-1}|F|²]`
    pub terms: [LogValue<T>; 6],
    /// Empirical constant `LHS / RHS`; `None` when both vanish.
    pub ratio: Option<T>,
    pub violation: bool,
}

/// Weighted estimate for one equation `dz - L z dt = (F0 + ∇·F) dt + F1 dW`.
#[allow(clippy::too_many_arguments)]
pub fn carleman_check_single<T: Real>(
    d: T,
    sources: &AdjointSources<T>,
    z0: &[T],
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
    weights: &CarlemanWeights<T>,
    observation: &SubdomainMask,
) -> Result<SingleCheck<T>> {
    if coeffs.n() != 1 {
        return Err(Error::InvalidArgument(format!("single-equation check needs n = 1, got {}", coeffs.n())));
    }
    let traj = solve_adjoint(z0, coeffs, tree, grid, Some(sources))?;
    let z = traj.field();
    let one = T::one();
    let (two, three) = (cst::<T>(2.0), cst::<T>(3.0));
    let wi = |f: &AdaptedField<T>, what, lp: T, gp: T, mask| {
        weighted_integral(f, 0, what, lp, gp, mask, weights, tree, grid)
    };
    let source = |f: &Option<AdaptedField<T>>, p: T| match f {
        Some(f) => wi(f, Integrand::Value, p, p, None),
        None => Ok(LogValue::zero()),
    };
    let terms = [
        wi(z, Integrand::Value, d, d, None)?,
        wi(z, Integrand::Gradient, d - two, d - two, None)?,
        wi(z, Integrand::Value, d, d, Some(observation))?,
        source(&sources.f0, d - three)?,
        source(&sources.f1, d - one)?,
        source(&sources.flux, d - one)?,
    ];
    let lhs = terms[0].log_add(terms[1]);
    let rhs = terms[2..].iter().fold(LogValue::zero(), |acc, &t| acc.log_add(t));
    let ratio = lhs.ratio(rhs);
    Ok(SingleCheck { lhs, rhs, terms, ratio, violation: ratio.is_some_and(|r| r.is_infinite()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SubdomainRole;

    fn weight_mask(grid: &Grid1D<f64>) -> SubdomainMask {
        SubdomainMask::interval(grid, SubdomainRole::Weight, 0.45, 0.65).unwrap()
    }

    #[test]
    fn psi_on_three_points() {
        let grid = Grid1D::<f64>::new(3).unwrap();
        let mask = SubdomainMask::interval(&grid, SubdomainRole::Weight, 0.4, 0.6).unwrap();
        assert_eq!(build_psi(&grid, &mask).unwrap(), vec![0.75, 1.0, 0.75]);
    }

    #[test]
    fn psi_requires_midpoint_in_weight_region() {
        let grid = Grid1D::<f64>::new(31).unwrap();
        let mask = SubdomainMask::interval(&grid, SubdomainRole::Weight, 0.7, 0.9).unwrap();
        assert!(matches!(build_psi(&grid, &mask), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn gamma_bounds_and_theta_range() {
        for (nx, depth, horizon) in [(31, 10, 1.0), (15, 7, 0.3), (21, 16, 2.5)] {
            let grid = Grid1D::new(nx).unwrap();
            let tree = ScenarioTree::new(depth, horizon).unwrap();
            let psi = build_psi(&grid, &weight_mask(&grid)).unwrap();
            let w = eval_weights(3.0, 2.0, &psi, &grid, &tree).unwrap();
            let floor = 4.0 / (horizon * horizon);
            for m in 1..depth {
                assert!(w.gamma(m).unwrap() >= floor);
                for j in 0..nx {
                    let th = w.theta(m, j).unwrap();
                    assert!(th > 0.0 || w.ln_theta(m, j).unwrap() < -700.0);
                    assert!(th <= 1.0 && w.alpha(m, j).unwrap() < 0.0);
                }
            }
            if depth % 2 == 0 {
                assert_eq!(w.gamma(depth / 2).unwrap(), floor);
            }
            assert!(matches!(w.gamma(0), Err(Error::OutOfDomain { .. })));
            assert!(matches!(w.alpha(depth, 0), Err(Error::OutOfDomain { .. })));
        }
    }

    #[test]
    fn alpha_time_constant_is_stable_under_refinement() {
        let grid = Grid1D::new(15).unwrap();
        let psi = build_psi(&grid, &weight_mask(&grid)).unwrap();
        let mut fits = Vec::new();
        for depth in [8, 16, 32] {
            let tree = ScenarioTree::new(depth, 1.0).unwrap();
            let w = eval_weights(1.0, 2.0, &psi, &grid, &tree).unwrap();
            let c = w.alpha_time_constant(&tree).unwrap();
            assert!(c > 0.0 && c <= 1.0, "fit {c}");
            fits.push(c);
        }
        assert!(fits[0] <= fits[1] && fits[1] <= fits[2], "{fits:?}");
        assert!(fits[2] - fits[1] <= fits[1] - fits[0], "{fits:?}");
    }

    #[test]
    fn functional_matches_direct_sum_and_scales_in_lambda() {
        let grid = Grid1D::new(9).unwrap();
        let tree = ScenarioTree::new(6, 1.0).unwrap();
        let psi = build_psi(&grid, &weight_mask(&grid)).unwrap();
        let w = eval_weights(1.5, 1.0, &psi, &grid, &tree).unwrap();
        let f = AdaptedField::from_fn(9, 0, 6, |m, _, out| {
            for (j, v) in out.iter_mut().enumerate() {
                *v = (1.0 + m as f64) * (std::f64::consts::PI * grid.x(j)).sin();
            }
        })
        .unwrap();
        let d = 3.0;
        let mut direct = 0.0;
        for m in 1..6 {
            let g = w.gamma(m).unwrap();
            let v = f.node(m, 0);
            let mut grad = vec![0.0; 9];
            gradient_into(v, grid.h(), &mut grad);
            for j in 0..9 {
                let th2 = w.theta(m, j).unwrap().powi(2);
                direct += tree.dt()
                    * grid.h()
                    * th2
                    * (1.5f64.powf(d) * g.powf(d) * v[j] * v[j]
                        + 1.5f64.powf(d - 2.0) * g.powf(d - 2.0) * grad[j] * grad[j]);
            }
        }
        let i = carleman_functional_i(d, &f, &w, &grid, &tree).unwrap();
        assert!((i - direct).abs() <= 1e-12 * direct);

        // with θ held fixed, λ enters only through λ^p
        let a = weighted_integral(&f, 0, Integrand::Value, d, d, None, &w, &tree, &grid).unwrap();
        let b = weighted_integral(&f, 0, Integrand::Value, d + 1.0, d, None, &w, &tree, &grid).unwrap();
        assert!(((b.ln() - a.ln()) - 1.5f64.ln()).abs() < 1e-12);

        let zero = AdaptedField::zeros(9, 0, 6);
        assert_eq!(carleman_functional_i(d, &zero, &w, &grid, &tree).unwrap(), 0.0);
    }

    #[test]
    fn log_values_combine() {
        let a = LogValue(2.0f64.ln());
        let b = LogValue(3.0f64.ln());
        assert!((a.log_add(b).value() - 5.0).abs() < 1e-14);
        assert_eq!(LogValue::<f64>::zero().log_add(a), a);
        assert_eq!(a.ratio(LogValue::zero()), Some(f64::INFINITY));
        assert_eq!(LogValue::<f64>::zero().ratio(LogValue::zero()), None);
        assert_eq!(LogValue(-800.0f64).value(), 0.0);
        assert!((LogValue(-800.0f64).ratio(LogValue(-801.0)).unwrap() - 1f64.exp()).abs() < 1e-12);
    }
}
