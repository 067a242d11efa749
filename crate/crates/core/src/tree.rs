//! Discrete filtered probability space.
//!
//! A depth-`M` non-recombining binary tree: level `m` holds `2^m` nodes, node
//! `(m, k)` has children `(m + 1, 2k)` (increment `+sqrt(dt)`) and
//! `(m + 1, 2k + 1)` (increment `-sqrt(dt)`), each with conditional
//! probability one half. Adapted processes are node-indexed vectors.
//!
//! A level whose value is the same at every node is stored once
//! ([`LevelValues::Uniform`]). Deterministic problems therefore cost
//! `O(M)` memory even on deep trees, while path-dependent levels are stored
//! level-contiguously ([`LevelValues::PerNode`]).

use crate::error::{Error, Result};
use crate::scalar::{cst, from_usize, Real};

/// Largest supported tree depth.
pub const MAX_DEPTH: usize = 48;

/// Upper bound on the number of scalars a single path-dependent level may hold.
pub const MAX_LEVEL_VALUES: usize = 1 << 30;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioTree<T> {
    depth: usize,
    horizon: T,
    dt: T,
    sqrt_dt: T,
}

impl<T: Real> ScenarioTree<T> {
    pub fn new(depth: usize, horizon: T) -> Result<Self> {
        if depth < 1 {
            return Err(Error::InvalidArgument(format!("tree depth must be >= 1, got {depth}")));
        }
        if depth > MAX_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "tree depth {depth} exceeds the supported maximum {MAX_DEPTH}"
            )));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        let dt = horizon / from_usize(depth);
        Ok(Self { depth, horizon, dt, sqrt_dt: dt.sqrt() })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn sqrt_dt(&self) -> T {
        self.sqrt_dt
    }

    /// Time of level `m`, `t_m = m T / M`.
    pub fn time(&self, m: usize) -> T {
        self.horizon * from_usize(m) / from_usize(self.depth)
    }

    /// Number of nodes at level `m`.
    pub fn nodes_at(&self, m: usize) -> usize {
        1usize << m
    }

    /// Total number of nodes over levels `0..=M`.
    pub fn node_count(&self) -> usize {
        (1usize << (self.depth + 1)) - 1
    }

    /// Probability of a single node at level `m`.
    pub fn node_probability(&self, m: usize) -> T {
        cst::<T>(0.5).powi(m as i32)
    }

    /// Children of node `k` (at any level) in the next level.
    pub fn children(&self, k: usize) -> (usize, usize) {
        (2 * k, 2 * k + 1)
    }

    /// Brownian increment carried by the edge into child index `child`.
    pub fn increment(&self, child: usize) -> T {
        if child.is_multiple_of(2) {
            self.sqrt_dt
        } else {
            -self.sqrt_dt
        }
    }
}

/// Builds the tree for `depth` steps over `[0, horizon]`.
pub fn build_tree<T: Real>(depth: usize, horizon: T) -> Result<ScenarioTree<T>> {
    ScenarioTree::new(depth, horizon)
}

/// Values of an adapted field on one tree level.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelValues<T> {
    /// Same vector at every node of the level.
    Uniform(Vec<T>),
    /// Node-major storage: node `k` occupies `[k * dim, (k + 1) * dim)`.
    PerNode(Vec<T>),
}

impl<T: Real> LevelValues<T> {
    pub fn node(&self, k: usize, dim: usize) -> &[T] {
        match self {
            LevelValues::Uniform(v) => v,
            LevelValues::PerNode(v) => &v[k * dim..(k + 1) * dim],
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, LevelValues::Uniform(_))
    }

    /// Flattens into node-major storage for a level of `nodes` nodes.
    pub fn to_per_node(&self, nodes: usize) -> Vec<T> {
        match self {
            LevelValues::Uniform(v) => v.iter().copied().cycle().take(v.len() * nodes).collect(),
            LevelValues::PerNode(v) => v.clone(),
        }
    }

    fn raw(&self) -> &[T] {
        match self {
            LevelValues::Uniform(v) | LevelValues::PerNode(v) => v,
        }
    }

    pub fn max_abs(&self) -> T {
        self.raw().iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.raw().iter().all(|x| x.is_finite())
    }

    /// Applies `f` to each node vector of a level with `nodes` nodes.
    pub fn map_nodes<F>(&self, nodes: usize, dim: usize, mut f: F) -> LevelValues<T>
    where
        F: FnMut(&[T], &mut [T]),
    {
        match self {
            LevelValues::Uniform(v) => {
                let mut out = vec![T::zero(); dim];
                f(v, &mut out);
                LevelValues::Uniform(out)
            }
            LevelValues::PerNode(v) => {
                let in_dim = v.len() / nodes;
                let mut out = vec![T::zero(); nodes * dim];
                for (src, dst) in v.chunks_exact(in_dim).zip(out.chunks_exact_mut(dim)) {
                    f(src, dst);
                }
                LevelValues::PerNode(out)
            }
        }
    }

    /// Node-wise average of the two children (discrete `E[. | F_m]`).
    pub fn average_children(&self, dim: usize) -> LevelValues<T> {
        let half = cst::<T>(0.5);
        match self {
            LevelValues::Uniform(v) => LevelValues::Uniform(v.clone()),
            LevelValues::PerNode(v) => LevelValues::PerNode(
                v.chunks_exact(2 * dim)
                    .flat_map(|pair| {
                        let (up, down) = pair.split_at(dim);
                        up.iter().zip(down).map(move |(&a, &b)| half * (a + b))
                    })
                    .collect(),
            ),
        }
    }

    /// Node-wise `(up - down) / (2 sqrt(dt))`, the discrete integrand of `dW`.
    pub fn martingale_part(&self, dim: usize, sqrt_dt: T) -> LevelValues<T> {
        let scale = T::one() / (cst::<T>(2.0) * sqrt_dt);
        match self {
            LevelValues::Uniform(v) => LevelValues::Uniform(vec![T::zero(); v.len()]),
            LevelValues::PerNode(v) => LevelValues::PerNode(
                v.chunks_exact(2 * dim)
                    .flat_map(|pair| {
                        let (up, down) = pair.split_at(dim);
                        up.iter().zip(down).map(move |(&a, &b)| (a - b) * scale)
                    })
                    .collect(),
            ),
        }
    }
}

/// Checks that a path-dependent level of `2^m * dim` scalars fits in memory.
pub fn per_node_len(m: usize, dim: usize) -> Result<usize> {
    1usize
        .checked_shl(m as u32)
        .and_then(|nodes| nodes.checked_mul(dim))
        .filter(|&len| len <= MAX_LEVEL_VALUES)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("path-dependent level {m} with {dim} values per node exceeds storage limit"))
        })
}

/// Tree-node-indexed family of vectors of dimension `dim` over levels
/// `first_level..=last_level`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedField<T> {
    dim: usize,
    first_level: usize,
    levels: Vec<LevelValues<T>>,
}

impl<T: Real> AdaptedField<T> {
    /// Builds a field from explicit level data, validating the storage sizes.
    pub fn from_levels(dim: usize, first_level: usize, levels: Vec<LevelValues<T>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("adapted field needs at least one level".into()));
        }
        for (offset, values) in levels.iter().enumerate() {
            let m = first_level + offset;
            let expected = match values {
                LevelValues::Uniform(_) => dim,
                LevelValues::PerNode(_) => per_node_len(m, dim)?,
            };
            if values.raw().len() != expected {
                return Err(Error::DimensionMismatch {
                    context: "adapted field level",
                    expected,
                    actual: values.raw().len(),
                });
            }
        }
        Ok(Self { dim, first_level, levels })
    }

    /// Identically zero field on levels `first..=last`.
    pub fn zeros(dim: usize, first: usize, last: usize) -> Self {
        assert!(first <= last, "empty level range");
        Self {
            dim,
            first_level: first,
            levels: (first..=last).map(|_| LevelValues::Uniform(vec![T::zero(); dim])).collect(),
        }
    }

    /// Single-level field holding a deterministic vector.
    pub fn deterministic(level: usize, values: Vec<T>) -> Self {
        Self { dim: values.len(), first_level: level, levels: vec![LevelValues::Uniform(values)] }
    }

    /// Path-dependent field on levels `first..=last`, filled node by node.
    pub fn from_fn<F>(dim: usize, first: usize, last: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, &mut [T]),
    {
        if first > last {
            return Err(Error::InvalidArgument("empty level range".into()));
        }
        let mut levels = Vec::with_capacity(last - first + 1);
        for m in first..=last {
            let mut values = vec![T::zero(); per_node_len(m, dim)?];
            for (k, chunk) in values.chunks_exact_mut(dim).enumerate() {
                f(m, k, chunk);
            }
            levels.push(LevelValues::PerNode(values));
        }
        Ok(Self { dim, first_level: first, levels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn first_level(&self) -> usize {
        self.first_level
    }

    pub fn last_level(&self) -> usize {
        self.first_level + self.levels.len() - 1
    }

    pub fn contains_level(&self, m: usize) -> bool {
        m >= self.first_level && m <= self.last_level()
    }

    pub fn level(&self, m: usize) -> Result<&LevelValues<T>> {
        if !self.contains_level(m) {
            return Err(Error::LevelMismatch(format!(
                "level {m} outside field range [{}, {}]",
                self.first_level,
                self.last_level()
            )));
        }
        Ok(&self.levels[m - self.first_level])
    }

    /// Vector at node `(m, k)`. Panics when `m` is outside the field's range.
    pub fn node(&self, m: usize, k: usize) -> &[T] {
        self.levels[m - self.first_level].node(k, self.dim)
    }

    pub fn is_uniform(&self, m: usize) -> bool {
        self.levels[m - self.first_level].is_uniform()
    }

    pub(crate) fn set_level(&mut self, m: usize, values: LevelValues<T>) {
        self.levels[m - self.first_level] = values;
    }

    pub fn levels(&self) -> impl Iterator<Item = (usize, &LevelValues<T>)> {
        self.levels.iter().enumerate().map(move |(i, v)| (self.first_level + i, v))
    }

    pub fn max_abs(&self) -> T {
        self.levels.iter().fold(T::zero(), |acc, l| acc.max(l.max_abs()))
    }

    /// Node-wise `a * self + b * other`; both fields must share dimension and level range.
    pub fn linear_combination(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.dim != other.dim || self.first_level != other.first_level || self.levels.len() != other.levels.len() {
            return Err(Error::LevelMismatch("fields cover different levels or dimensions".into()));
        }
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .enumerate()
            .map(|(i, (x, y))| {
                let nodes = 1usize << (self.first_level + i);
                match (x, y) {
                    (LevelValues::Uniform(u), LevelValues::Uniform(v)) => {
                        LevelValues::Uniform(u.iter().zip(v).map(|(&p, &q)| a * p + b * q).collect())
                    }
                    _ => {
                        let u = x.to_per_node(nodes);
                        let v = y.to_per_node(nodes);
                        LevelValues::PerNode(u.iter().zip(&v).map(|(&p, &q)| a * p + b * q).collect())
                    }
                }
            })
            .collect();
        Ok(Self { dim: self.dim, first_level: self.first_level, levels })
    }
}

fn check_parent_level<T: Real>(field: &AdaptedField<T>, m: usize, tree: &ScenarioTree<T>) -> Result<()> {
    if m >= tree.depth() {
        return Err(Error::InvalidArgument(format!("level {m} has no children in a depth-{} tree", tree.depth())));
    }
    if !field.contains_level(m + 1) {
        return Err(Error::InvalidArgument(format!(
            "field does not cover level {} (range [{}, {}])",
            m + 1,
            field.first_level(),
            field.last_level()
        )));
    }
    Ok(())
}

/// Discrete `E[f_{m+1} | F_m]`: the average of each level-`m` node's children.
pub fn conditional_expectation<T: Real>(
    field: &AdaptedField<T>,
    m: usize,
    tree: &ScenarioTree<T>,
) -> Result<AdaptedField<T>> {
    check_parent_level(field, m, tree)?;
    let values = field.level(m + 1)?.average_children(field.dim());
    AdaptedField::from_levels(field.dim(), m, vec![values])
}

/// Discrete martingale-representation integrand `E[f_{m+1} dW | F_m] / dt`.
pub fn martingale_coefficient<T: Real>(
    field: &AdaptedField<T>,
    m: usize,
    tree: &ScenarioTree<T>,
) -> Result<AdaptedField<T>> {
    check_parent_level(field, m, tree)?;
    let values = field.level(m + 1)?.martingale_part(field.dim(), tree.sqrt_dt());
    AdaptedField::from_levels(field.dim(), m, vec![values])
}

/// `E[f_m]` as the `2^-m`-weighted sum over the level's nodes.
pub fn expectation<T: Real>(field: &AdaptedField<T>, m: usize) -> Result<Vec<T>> {
    Ok(level_expectation(field.level(m)?, m, field.dim()))
}

pub(crate) fn level_expectation<T: Real>(values: &LevelValues<T>, m: usize, dim: usize) -> Vec<T> {
    match values {
        LevelValues::Uniform(v) => v.clone(),
        LevelValues::PerNode(v) => {
            let mut acc = vec![T::zero(); dim];
            for chunk in v.chunks_exact(dim) {
                for (a, &x) in acc.iter_mut().zip(chunk) {
                    *a = *a + x;
                }
            }
            let w = cst::<T>(0.5).powi(m as i32);
            acc.iter_mut().for_each(|a| *a = *a * w);
            acc
        }
    }
}

/// `E[g(node value)]` on level `m` for a scalar functional `g`.
pub(crate) fn level_mean_of<T: Real, F>(values: &LevelValues<T>, m: usize, dim: usize, mut g: F) -> T
where
    F: FnMut(&[T]) -> T,
{
    match values {
        LevelValues::Uniform(v) => g(v),
        LevelValues::PerNode(v) => {
            let total: T = v.chunks_exact(dim).map(&mut g).sum();
            total * cst::<T>(0.5).powi(m as i32)
        }
    }
}

/// `E[g(a, b)]` on level `m` for two fields' node vectors.
pub(crate) fn level_mean_of_pair<T: Real, F>(
    a: &LevelValues<T>,
    dim_a: usize,
    b: &LevelValues<T>,
    dim_b: usize,
    m: usize,
    mut g: F,
) -> T
where
    F: FnMut(&[T], &[T]) -> T,
{
    if a.is_uniform() && b.is_uniform() {
        return g(a.node(0, dim_a), b.node(0, dim_b));
    }
    let nodes = 1usize << m;
    let total: T = (0..nodes).map(|k| g(a.node(k, dim_a), b.node(k, dim_b))).sum();
    total * cst::<T>(0.5).powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_tree_examples() {
        let t = build_tree(1, 1.0_f64).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.dt(), 1.0);
        assert_eq!(t.increment(0), 1.0);
        assert_eq!(t.increment(1), -1.0);

        let t = build_tree(2, 1.0_f64).unwrap();
        assert_eq!(t.node_count(), 7);
        assert_eq!(t.dt(), 0.5);

        assert!(matches!(build_tree(0, 1.0_f64), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_tree(3, -1.0_f64), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_tree(3, 0.0_f64), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn level_sizes_and_leaf_weights() {
        let t = build_tree(10, 1.0_f64).unwrap();
        for m in 0..=10 {
            assert_eq!(t.nodes_at(m), 1 << m);
        }
        let total: f64 = (0..t.nodes_at(10)).map(|_| t.node_probability(10)).sum();
        assert!((total - 1.0).abs() <= 1e-14);
        assert_eq!(t.children(3), (6, 7));
    }

    #[test]
    fn conditional_expectation_midpoint() {
        let t = build_tree(1, 1.0_f64).unwrap();
        let f = AdaptedField::from_levels(1, 1, vec![LevelValues::PerNode(vec![2.0, 4.0])]).unwrap();
        let e = conditional_expectation(&f, 0, &t).unwrap();
        assert_eq!(e.node(0, 0), &[3.0]);
        let c = AdaptedField::deterministic(1, vec![7.5]);
        assert_eq!(conditional_expectation(&c, 0, &t).unwrap().node(0, 0), &[7.5]);
    }

    #[test]
    fn martingale_coefficient_examples() {
        let t = build_tree(4, 1.0_f64).unwrap();
        let s = t.sqrt_dt();
        let flat = AdaptedField::from_fn(1, 1, 1, |_, _, v| v[0] = 3.0).unwrap();
        assert_eq!(martingale_coefficient(&flat, 0, &t).unwrap().node(0, 0), &[0.0]);
        let unit = AdaptedField::from_fn(1, 1, 1, |_, k, v| v[0] = t.increment(k)).unwrap();
        let y = martingale_coefficient(&unit, 0, &t).unwrap();
        assert!((y.node(0, 0)[0] - 1.0).abs() < 1e-15);
        assert!(s > 0.0);
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let t = build_tree(2, 1.0_f64).unwrap();
        let f = AdaptedField::<f64>::zeros(2, 0, 1);
        assert!(matches!(conditional_expectation(&f, 1, &t), Err(Error::InvalidArgument(_))));
        assert!(matches!(martingale_coefficient(&f, 2, &t), Err(Error::InvalidArgument(_))));
        assert!(expectation(&f, 2).is_err());
    }

    #[test]
    fn expectation_examples() {
        let c = AdaptedField::deterministic(3, vec![1.5, -2.0]);
        assert_eq!(expectation(&c, 3).unwrap(), vec![1.5, -2.0]);
        let f = AdaptedField::from_levels(1, 1, vec![LevelValues::PerNode(vec![5.0, 1.0])]).unwrap();
        assert_eq!(expectation(&f, 1).unwrap(), vec![3.0]);
    }

    #[test]
    fn squared_increment_has_mean_dt() {
        let t = build_tree(6, 2.0_f64).unwrap();
        for m in 1..=6 {
            let f = AdaptedField::from_fn(1, m, m, |_, k, v| v[0] = t.increment(k).powi(2)).unwrap();
            let e = expectation(&f, m).unwrap()[0];
            // sqrt(dt)^2 may differ from dt by an ulp
            assert!((e - t.dt()).abs() <= 4.0 * f64::EPSILON * t.dt());
        }
    }

    #[test]
    fn from_levels_validates_sizes() {
        let bad = AdaptedField::<f64>::from_levels(2, 1, vec![LevelValues::PerNode(vec![0.0; 3])]);
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }
}
