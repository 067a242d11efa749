//! Turns a validated configuration into core objects and seeded data.

use cascade_core::{
    AdaptedField, CascadeCoefficients, CoefficientField, Coefficients, Field, Grid, Grid1D, ScenarioTree,
    SubdomainMask, Subdomains, Tree,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{CoefficientEntry, EntryKind, ExperimentConfig, ProfileConfig, ProfileKind, Region};
use crate::error::CliError;

/// Independent ChaCha8 streams derived from the one configured seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Initial = 0,
    Terminal = 1,
    Samples = 2,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: Grid,
    pub tree: Tree,
    pub subdomains: Subdomains,
    pub coeffs: Coefficients,
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem, CliError> {
    build_problem_with_horizon(cfg, cfg.problem.horizon)
}

pub fn build_problem_with_horizon(cfg: &ExperimentConfig, horizon: f64) -> Result<Problem, CliError> {
    let p = &cfg.problem;
    let grid = Grid1D::new(p.nx)?;
    let pair = |b: [f64; 2]| (b[0], b[1]);
    let subdomains = Subdomains::new(&grid, pair(p.control), pair(p.coupling), pair(p.weight))?;
    let mut coeffs = CascadeCoefficients::new(p.n)?.with_coupling_floor(p.a0).with_ellipticity_floor(p.beta0);
    for entry in &cfg.coefficients {
        let field = coefficient_field(entry, &grid, &subdomains);
        let i = entry.i - 1;
        coeffs = match (entry.kind, entry.j) {
            (EntryKind::A, Some(j)) => coeffs.with_reaction(i, j - 1, field),
            (EntryKind::B, Some(j)) => coeffs.with_noise(i, j - 1, field),
            (EntryKind::C, Some(j)) => coeffs.with_convection(i, j - 1, field),
            (EntryKind::Beta, _) => coeffs.with_diffusion(i, field),
            (_, None) => unreachable!("validated: j present for matrix entries"),
        };
    }
    let tree = ScenarioTree::new(p.depth, horizon)?;
    coeffs.check_discretization(&grid, &tree)?;
    Ok(Problem { grid, tree, subdomains, coeffs })
}

fn region_mask(region: Region, s: &Subdomains) -> Option<&SubdomainMask> {
    match region {
        Region::Whole => None,
        Region::Control => Some(&s.control),
        Region::Coupling => Some(&s.coupling),
        Region::Weight => Some(&s.weight),
    }
}

fn coefficient_field(e: &CoefficientEntry, grid: &Grid, s: &Subdomains) -> CoefficientField<f64> {
    let mask = region_mask(e.region, s);
    let restrict = |row: &[f64]| -> Vec<f64> {
        let mut v = row.to_vec();
        if let Some(m) = mask {
            m.restrict_in_place(&mut v);
        }
        v
    };
    if let Some(v) = e.value {
        return match mask {
            None => CoefficientField::Constant(v),
            Some(m) => CoefficientField::indicator(m, v),
        };
    }
    if let Some(profile) = &e.profile {
        return CoefficientField::Spatial(restrict(profile));
    }
    let rows = e.samples.as_deref().unwrap_or_default();
    debug_assert!(rows.iter().all(|r| r.len() == grid.nx()));
    CoefficientField::Sampled(rows.iter().map(|r| restrict(r)).collect())
}

fn sine(grid: &Grid, amplitudes: &[f64]) -> Vec<f64> {
    let s = grid.sample(|x| (std::f64::consts::PI * x).sin());
    amplitudes.iter().flat_map(|&a| s.iter().map(move |v| a * v)).collect()
}

fn normals(rng: &mut ChaCha8Rng, amplitudes: &[f64], nx: usize) -> Vec<f64> {
    amplitudes
        .iter()
        .flat_map(|&a| (0..nx).map(move |_| a))
        .map(|a| a * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect::<Vec<f64>>()
}

/// Deterministic adjoint initial state.
pub fn initial_state(cfg: &ExperimentConfig, grid: &Grid) -> Vec<f64> {
    profile_vector(&cfg.initial, cfg.seed, Stream::Initial, grid)
}

fn profile_vector(profile: &ProfileConfig, seed: u64, stream: Stream, grid: &Grid) -> Vec<f64> {
    match profile.kind {
        ProfileKind::Sine => sine(grid, &profile.amplitudes),
        ProfileKind::Zero => vec![0.0; profile.amplitudes.len() * grid.nx()],
        ProfileKind::Random => normals(&mut rng(seed, stream), &profile.amplitudes, grid.nx()),
    }
}

/// Terminal data on level `M`; random terminal data differ leaf by leaf.
pub fn terminal_state(cfg: &ExperimentConfig, grid: &Grid, tree: &Tree) -> Result<Field, CliError> {
    let depth = tree.depth();
    let profile = &cfg.terminal;
    if profile.kind != ProfileKind::Random {
        return Ok(AdaptedField::deterministic(depth, profile_vector(profile, cfg.seed, Stream::Terminal, grid)));
    }
    let mut rng = rng(cfg.seed, Stream::Terminal);
    let dim = profile.amplitudes.len() * grid.nx();
    Ok(AdaptedField::from_fn(dim, depth, depth, |_, _, out| {
        out.copy_from_slice(&normals(&mut rng, &profile.amplitudes, grid.nx()));
    })?)
}

/// Seeded standard normal initial states for the Carleman check.
pub fn sample_states(cfg: &ExperimentConfig, grid: &Grid) -> Vec<Vec<f64>> {
    let mut rng = rng(cfg.seed, Stream::Samples);
    let ones = vec![1.0; cfg.n()];
    (0..cfg.carleman.samples).map(|_| normals(&mut rng, &ones, grid.nx())).collect()
}

/// `E|yT|^2_h`.
pub fn terminal_energy(field: &Field, tree: &Tree, grid: &Grid) -> Result<f64, CliError> {
    Ok(cascade_core::hum::mean_square(field, tree.depth(), grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let cfg = parse_config("[problem]\nn = 2\nnx = 9\n[initial]\nkind = \"random\"\n").unwrap();
        let grid = Grid1D::new(9).unwrap();
        let a = initial_state(&cfg, &grid);
        assert_eq!(a, initial_state(&cfg, &grid));
        assert_ne!(a, sample_states(&cfg, &grid)[0]);
    }

    #[test]
    fn region_restricts_constant_entries() {
        let text = "[problem]\nn = 2\nnx = 9\n[[coefficients]]\nkind = \"a\"\ni = 2\nj = 1\nregion = \"coupling\"\nvalue = 1.0\n";
        let p = build_problem(&parse_config(text).unwrap()).unwrap();
        let a21 = p.coeffs.reaction(1, 0);
        let inside: Vec<bool> = (0..9).map(|j| a21.at(0, j) == 1.0).collect();
        assert_eq!(inside, (0..9).map(|j| p.subdomains.coupling.contains(j)).collect::<Vec<_>>());
    }

    #[test]
    fn random_terminal_varies_across_leaves() {
        let cfg = parse_config("[problem]\nn = 1\nnx = 5\ndepth = 3\n[terminal]\nkind = \"random\"\n").unwrap();
        let p = build_problem(&cfg).unwrap();
        let t = terminal_state(&cfg, &p.grid, &p.tree).unwrap();
        assert!(!t.is_uniform(3));
        assert_ne!(t.node(3, 0), t.node(3, 1));
    }
}
