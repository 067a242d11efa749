//! Controlled backward system
//! `dy + L y dt = (A y + C·∇y + B Y + e1 χ u) dt + Y dW`, `y(T) = yT`.
//!
//! Two schemes:
//!
//! * [`Scheme::Direct`]: backward induction with `Ê = E[y_{m+1} | F_m]`,
//!   `Y_m` the martingale coefficient, and
//!   `(I - dt L(t_m)) y_m = Ê - dt (A Ê + C·DÊ + B Y_m + e1 u_m)`.
//! * [`Scheme::Transpose`]: the exact transpose of one adjoint step,
//!   `w = (I - dt L(t_{m+1}))^{-1} Ê`,
//!   `y_m = w - dt (A w + C·Dw) - dt B Y_m - dt e1 u_m`, so that
//!   `E<y_{m+1}, z_{m+1}>_h - E<y_m, z_m>_h = dt E<u_m, z1_m>_h` holds for
//!   every adjoint trajectory up to roundoff.

use rayon::prelude::*;

use crate::adjoint::AdjointTrajectory;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SubdomainMask};
use crate::model::CascadeCoefficients;
use crate::ops::{ImplicitDiffusion, LevelTerms};
use crate::scalar::{dot, Real};
use crate::tree::{level_mean_of, level_mean_of_pair, per_node_len, AdaptedField, LevelValues, ScenarioTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Direct,
    Transpose,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Direct => "direct",
            Scheme::Transpose => "transpose",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Scheme::Direct),
            "transpose" => Ok(Scheme::Transpose),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}, expected direct or transpose"))),
        }
    }
}

/// Scalar control `u` on levels `0..M-1`, identically zero outside the
/// control mask.
#[derive(Clone, Debug)]
pub struct ControlField<T> {
    field: AdaptedField<T>,
}

impl<T: Real> ControlField<T> {
    /// Wraps `field` (dimension `N_x`, levels `0..=depth-1` at least) and
    /// zeroes every value outside `mask`.
    pub fn new(field: AdaptedField<T>, mask: &SubdomainMask, depth: usize) -> Result<Self> {
        if field.dim() != mask.len() || field.first_level() != 0 || field.last_level() + 1 < depth {
            return Err(Error::InvalidArgument(format!(
                "control must have dimension {} on levels 0..{}",
                mask.len(),
                depth.saturating_sub(1)
            )));
        }
        let dim = field.dim();
        let levels = (0..depth)
            .map(|m| {
                let nodes = 1usize << m;
                field.level(m).map(|v| {
                    v.map_nodes(if v.is_uniform() { 1 } else { nodes }, dim, |src, dst| {
                        dst.copy_from_slice(src);
                        mask.restrict_in_place(dst);
                    })
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { field: AdaptedField::from_levels(dim, 0, levels)? })
    }

    pub fn zeros(nx: usize, depth: usize) -> Self {
        Self { field: AdaptedField::zeros(nx, 0, depth.saturating_sub(1)) }
    }

    /// `u = χ z1` read off an adjoint trajectory.
    pub fn from_adjoint(traj: &AdjointTrajectory<T>, mask: &SubdomainMask) -> Result<Self> {
        let nx = mask.len();
        let depth = traj.depth();
        let levels = (0..depth)
            .map(|m| {
                let v = traj.field().level(m)?;
                let nodes = if v.is_uniform() { 1 } else { 1usize << m };
                Ok(v.map_nodes(nodes, nx, |src, dst| {
                    dst.copy_from_slice(&src[..nx]);
                    mask.restrict_in_place(dst);
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { field: AdaptedField::from_levels(nx, 0, levels)? })
    }

    pub fn field(&self) -> &AdaptedField<T> {
        &self.field
    }

    pub fn node(&self, m: usize, k: usize) -> &[T] {
        self.field.node(m, k)
    }

    pub fn depth(&self) -> usize {
        self.field.last_level() + 1
    }

    /// `sum_{m<M} dt E|u_m|^2_h`.
    pub fn cost(&self, tree: &ScenarioTree<T>, grid: &Grid1D<T>) -> T {
        let h = grid.h();
        let dim = self.field.dim();
        self.field
            .levels()
            .take(tree.depth())
            .map(|(m, v)| tree.dt() * level_mean_of(v, m, dim, |u| h * dot(u, u)))
            .sum()
    }

    pub fn scaled(&self, a: T) -> Self {
        Self { field: self.field.linear_combination(a, &self.field, T::zero()).expect("same shape") }
    }
}

/// Solution pair `(y, Y)` of the backward system.
#[derive(Clone, Debug)]
pub struct BackwardTrajectory<T> {
    y: AdaptedField<T>,
    martingale: AdaptedField<T>,
    scheme: Scheme,
}

impl<T: Real> BackwardTrajectory<T> {
    pub fn y(&self) -> &AdaptedField<T> {
        &self.y
    }

    /// `Y` on levels `0..M-1`.
    pub fn martingale(&self) -> &AdaptedField<T> {
        &self.martingale
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn initial(&self) -> &[T] {
        self.y.node(0, 0)
    }
}

struct Prepared<'a, T> {
    n: usize,
    nx: usize,
    depth: usize,
    dt: T,
    sqrt_dt: T,
    terminal: &'a LevelValues<T>,
}

fn prepare<'a, T: Real>(
    y_terminal: &'a AdaptedField<T>,
    u: &ControlField<T>,
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
) -> Result<Prepared<'a, T>> {
    let (n, nx, depth) = (coeffs.n(), grid.nx(), tree.depth());
    if y_terminal.dim() != n * nx {
        return Err(Error::DimensionMismatch { context: "terminal state", expected: n * nx, actual: y_terminal.dim() });
    }
    if !y_terminal.contains_level(depth) {
        return Err(Error::LevelMismatch(format!("terminal state must be given on level {depth}")));
    }
    if u.field.dim() != nx {
        return Err(Error::DimensionMismatch { context: "control", expected: nx, actual: u.field.dim() });
    }
    if u.depth() < depth {
        return Err(Error::LevelMismatch(format!("control must cover levels 0..{}", depth - 1)));
    }
    coeffs.check_discretization(grid, tree)?;
    let terminal = y_terminal.level(depth)?;
    if !terminal.is_finite() {
        return Err(Error::NumericalBlowup { stage: "terminal state", level: depth });
    }
    Ok(Prepared { n, nx, depth, dt: tree.dt(), sqrt_dt: tree.sqrt_dt(), terminal })
}

/// One node of either scheme: `mean` is `Ê`, `mart` is `Y_m`, `u` the control.
type NodeRule<'a, T> = dyn Fn(&[T], &[T], &[T], &mut [T]) + Sync + 'a;

fn sweep<T: Real + 'static>(
    p: &Prepared<'_, T>,
    u: &ControlField<T>,
    stage: &'static str,
    rule_at: impl Fn(usize) -> Result<Box<NodeRule<'static, T>>>,
) -> Result<BackwardTrajectory<T>> {
    let dim = p.n * p.nx;
    let mut y = AdaptedField::zeros(dim, 0, p.depth);
    let mut mart = AdaptedField::zeros(dim, 0, p.depth - 1);
    y.set_level(p.depth, p.terminal.clone());
    for m in (0..p.depth).rev() {
        let rule = rule_at(m)?;
        let child = y.level(m + 1)?;
        let mean = child.average_children(dim);
        let martingale = child.martingale_part(dim, p.sqrt_dt);
        let control = u.field.level(m)?;
        let next = if mean.is_uniform() && control.is_uniform() {
            let mut out = vec![T::zero(); dim];
            rule(mean.node(0, dim), martingale.node(0, dim), control.node(0, p.nx), &mut out);
            LevelValues::Uniform(out)
        } else {
            let mut out = vec![T::zero(); per_node_len(m, dim)?];
            out.par_chunks_exact_mut(dim).enumerate().for_each(|(k, dst)| {
                rule(mean.node(k, dim), martingale.node(k, dim), control.node(k, p.nx), dst);
            });
            LevelValues::PerNode(out)
        };
        if !next.is_finite() {
            return Err(Error::NumericalBlowup { stage, level: m });
        }
        y.set_level(m, next);
        mart.set_level(m, martingale);
    }
    Ok(BackwardTrajectory { y, martingale: mart, scheme: Scheme::Direct })
}

/// Backward induction with lower-order terms evaluated at the conditional mean.
pub fn solve_backward_direct<T: Real>(
    y_terminal: &AdaptedField<T>,
    u: &ControlField<T>,
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
) -> Result<BackwardTrajectory<T>> {
    let p = prepare(y_terminal, u, coeffs, tree, grid)?;
    let (dt, nx) = (p.dt, p.nx);
    let mut traj = sweep(&p, u, "backward direct", |m| {
        let terms = LevelTerms::new(coeffs, m, grid);
        let diffusion = ImplicitDiffusion::new(coeffs, m, dt, grid)?;
        Ok(Box::new(move |mean: &[T], mart: &[T], ctrl: &[T], out: &mut [T]| {
            out.copy_from_slice(mean);
            terms.add_state_drift(mean, -dt, out);
            terms.add_state_noise(mart, -dt, out);
            for (o, &c) in out[..nx].iter_mut().zip(ctrl) {
                *o = *o - dt * c;
            }
            diffusion.solve_in_place(out);
        }))
    })?;
    traj.scheme = Scheme::Direct;
    Ok(traj)
}

/// Exact transpose of the adjoint step map; see the module docs.
pub fn solve_backward_transpose<T: Real>(
    y_terminal: &AdaptedField<T>,
    u: &ControlField<T>,
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
) -> Result<BackwardTrajectory<T>> {
    let p = prepare(y_terminal, u, coeffs, tree, grid)?;
    let (dt, nx) = (p.dt, p.nx);
    let mut traj = sweep(&p, u, "backward transpose", |m| {
        let terms = LevelTerms::new(coeffs, m, grid);
        let diffusion = ImplicitDiffusion::new(coeffs, m + 1, dt, grid)?;
        Ok(Box::new(move |mean: &[T], mart: &[T], ctrl: &[T], out: &mut [T]| {
            let mut w = mean.to_vec();
            diffusion.solve_in_place(&mut w);
            out.copy_from_slice(&w);
            terms.add_state_drift(&w, -dt, out);
            terms.add_state_noise(mart, -dt, out);
            for (o, &c) in out[..nx].iter_mut().zip(ctrl) {
                *o = *o - dt * c;
            }
        }))
    })?;
    traj.scheme = Scheme::Transpose;
    Ok(traj)
}

/// Dispatches on `scheme`.
pub fn solve_backward<T: Real>(
    scheme: Scheme,
    y_terminal: &AdaptedField<T>,
    u: &ControlField<T>,
    coeffs: &CascadeCoefficients<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
) -> Result<BackwardTrajectory<T>> {
    match scheme {
        Scheme::Direct => solve_backward_direct(y_terminal, u, coeffs, tree, grid),
        Scheme::Transpose => solve_backward_transpose(y_terminal, u, coeffs, tree, grid),
    }
}

/// `|E<y(T), z(T)>_h - <y(0), z(0)>_h - sum_m dt E<u_m, z1_m>_h|`.
pub fn duality_gap<T: Real>(
    back: &BackwardTrajectory<T>,
    adj: &AdjointTrajectory<T>,
    u: &ControlField<T>,
    tree: &ScenarioTree<T>,
    grid: &Grid1D<T>,
) -> Result<T> {
    let (depth, nx, h) = (tree.depth(), grid.nx(), grid.h());
    let dim = back.y.dim();
    if adj.field().dim() != dim || adj.depth() != depth || back.y.last_level() != depth || u.field.dim() != nx {
        return Err(Error::InvalidArgument("duality gap: trajectories live on different discretizations".into()));
    }
    if u.depth() < depth {
        return Err(Error::LevelMismatch(format!("control must cover levels 0..{}", depth - 1)));
    }
    let terminal =
        h * level_mean_of_pair(back.y.level(depth)?, dim, adj.field().level(depth)?, dim, depth, |a, b| dot(a, b));
    let initial = h * dot(back.initial(), adj.initial());
    let mut forcing = T::zero();
    for m in 0..depth {
        let pairing = level_mean_of_pair(u.field.level(m)?, nx, adj.field().level(m)?, dim, m, |a, b| dot(a, &b[..nx]));
        forcing = forcing + tree.dt() * h * pairing;
    }
    Ok((terminal - initial - forcing).abs())
}
