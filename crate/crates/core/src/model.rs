//! Coefficient data of the cascade system and its explicit constants.
//!
//! Indices are 0-based in the API (`reaction(1, 0)` is `a_21`); reports
//! print them 1-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{assemble_diffusion, half_point_samples, DiffusionOperator, Grid1D, SubdomainMask};
use crate::scalar::{cst, Real};
use crate::tree::ScenarioTree;

/// A space-time coefficient: a constant, a time-independent profile sampled at
/// the interior grid points, or samples on every `(time level, point)` pair.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientField<T> {
    Constant(T),
    Spatial(Vec<T>),
    Sampled(Vec<Vec<T>>),
}

impl<T: Real> Default for CoefficientField<T> {
    fn default() -> Self {
        CoefficientField::Constant(T::zero())
    }
}

impl<T: Real> CoefficientField<T> {
    pub fn zero() -> Self {
        CoefficientField::Constant(T::zero())
    }

    /// `value` on the mask, zero elsewhere.
    pub fn indicator(mask: &SubdomainMask, value: T) -> Self {
        CoefficientField::Spatial(mask.indicator::<T>().into_iter().map(|c| c * value).collect())
    }

    /// Value at time level `m`, interior point `j`.
    #[inline]
    pub fn at(&self, m: usize, j: usize) -> T {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::Spatial(v) => v[j],
            CoefficientField::Sampled(levels) => levels[m][j],
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoefficientField::Constant(c) => *c == T::zero(),
            CoefficientField::Spatial(v) => v.iter().all(|x| *x == T::zero()),
            CoefficientField::Sampled(l) => l.iter().flatten().all(|x| *x == T::zero()),
        }
    }

    /// `|.|_inf` over all samples.
    pub fn sup_norm(&self) -> T {
        match self {
            CoefficientField::Constant(c) => c.abs(),
            CoefficientField::Spatial(v) => v.iter().fold(T::zero(), |a, x| a.max(x.abs())),
            CoefficientField::Sampled(l) => l.iter().flatten().fold(T::zero(), |a, x| a.max(x.abs())),
        }
    }

    /// Number of distinct time samples (1 unless the field is time-sampled).
    pub fn time_samples(&self) -> usize {
        match self {
            CoefficientField::Sampled(l) => l.len(),
            _ => 1,
        }
    }

    fn level_values(&self, m: usize, nx: usize) -> Vec<T> {
        (0..nx).map(|j| self.at(m, j)).collect()
    }

    fn check_shape(&self, nx: usize, depth: usize, what: &str) -> Result<()> {
        match self {
            CoefficientField::Constant(c) if !c.is_finite() => {
                Err(Error::InvalidArgument(format!("{what} is not finite")))
            }
            CoefficientField::Spatial(v) if v.len() != nx => {
                Err(Error::InvalidArgument(format!("{what} has {} spatial samples, grid has {nx}", v.len())))
            }
            CoefficientField::Sampled(l) if l.len() < depth + 1 || l.iter().any(|row| row.len() != nx) => Err(
                Error::InvalidArgument(format!("{what} must be sampled on {} time levels x {nx} points", depth + 1)),
            ),
            _ => Ok(()),
        }
    }
}

/// Which coefficient matrix an entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientKind {
    Reaction,
    Convection,
    Noise,
}

impl fmt::Display for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientKind::Reaction => "a",
            CoefficientKind::Convection => "C",
            CoefficientKind::Noise => "b",
        })
    }
}

/// Coefficients `A`, `B`, `C`, diffusion `beta^k` and the floors `a_0`, `beta_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeCoefficients<T> {
    n: usize,
    reaction: Vec<CoefficientField<T>>,
    convection: Vec<CoefficientField<T>>,
    noise: Vec<CoefficientField<T>>,
    diffusion: Vec<CoefficientField<T>>,
    coupling_floor: T,
    ellipticity_floor: T,
    diffusion_enabled: bool,
}

impl<T: Real> CascadeCoefficients<T> {
    /// `n` components, all potentials zero, `beta^k = 1`, `beta_0 = 1`, `a_0 = 1/2`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("system needs at least one component".into()));
        }
        Ok(Self {
            n,
            reaction: vec![CoefficientField::zero(); n * n],
            convection: vec![CoefficientField::zero(); n * n],
            noise: vec![CoefficientField::zero(); n * n],
            diffusion: vec![CoefficientField::Constant(T::one()); n],
            coupling_floor: cst(0.5),
            ellipticity_floor: T::one(),
            diffusion_enabled: true,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn with_reaction(mut self, i: usize, j: usize, field: CoefficientField<T>) -> Self {
        self.reaction[i * self.n + j] = field;
        self
    }

    pub fn with_convection(mut self, i: usize, j: usize, field: CoefficientField<T>) -> Self {
        self.convection[i * self.n + j] = field;
        self
    }

    pub fn with_noise(mut self, i: usize, j: usize, field: CoefficientField<T>) -> Self {
        self.noise[i * self.n + j] = field;
        self
    }

    pub fn with_diffusion(mut self, k: usize, field: CoefficientField<T>) -> Self {
        self.diffusion[k] = field;
        self
    }

    pub fn with_coupling_floor(mut self, a0: T) -> Self {
        self.coupling_floor = a0;
        self
    }

    pub fn with_ellipticity_floor(mut self, beta0: T) -> Self {
        self.ellipticity_floor = beta0;
        self
    }

    /// Drops the diffusion operators from both solvers. Test hook for
    /// isolating the lower-order and noise terms.
    #[doc(hidden)]
    pub fn without_diffusion(mut self) -> Self {
        self.diffusion_enabled = false;
        self
    }

    pub fn diffusion_enabled(&self) -> bool {
        self.diffusion_enabled
    }

    pub fn reaction(&self, i: usize, j: usize) -> &CoefficientField<T> {
        &self.reaction[i * self.n + j]
    }

    pub fn convection(&self, i: usize, j: usize) -> &CoefficientField<T> {
        &self.convection[i * self.n + j]
    }

    pub fn noise(&self, i: usize, j: usize) -> &CoefficientField<T> {
        &self.noise[i * self.n + j]
    }

    pub fn diffusion(&self, k: usize) -> &CoefficientField<T> {
        &self.diffusion[k]
    }

    pub fn coupling_floor(&self) -> T {
        self.coupling_floor
    }

    pub fn ellipticity_floor(&self) -> T {
        self.ellipticity_floor
    }

    fn entry(&self, kind: CoefficientKind, i: usize, j: usize) -> &CoefficientField<T> {
        match kind {
            CoefficientKind::Reaction => self.reaction(i, j),
            CoefficientKind::Convection => self.convection(i, j),
            CoefficientKind::Noise => self.noise(i, j),
        }
    }

    /// `M_0 = max_i |a_{i,i-1}|_inf`.
    pub fn coupling_bound(&self) -> T {
        (1..self.n).map(|i| self.reaction(i, i - 1).sup_norm()).fold(T::zero(), T::max)
    }

    /// Largest number of time samples over all entries.
    pub fn time_samples(&self) -> usize {
        self.reaction
            .iter()
            .chain(&self.convection)
            .chain(&self.noise)
            .chain(&self.diffusion)
            .map(CoefficientField::time_samples)
            .max()
            .unwrap_or(1)
    }

    /// Checks every sampled entry against the grid and tree sizes.
    pub fn check_discretization(&self, grid: &Grid1D<T>, tree: &ScenarioTree<T>) -> Result<()> {
        let (nx, depth) = (grid.nx(), tree.depth());
        for kind in [CoefficientKind::Reaction, CoefficientKind::Convection, CoefficientKind::Noise] {
            for i in 0..self.n {
                for j in 0..self.n {
                    self.entry(kind, i, j).check_shape(nx, depth, &format!("{kind}{}{}", i + 1, j + 1))?;
                }
            }
        }
        for (k, d) in self.diffusion.iter().enumerate() {
            d.check_shape(nx, depth, &format!("beta{}", k + 1))?;
        }
        if !(self.ellipticity_floor > T::zero()) {
            return Err(Error::InvalidArgument("ellipticity floor beta0 must be positive".into()));
        }
        Ok(())
    }

    /// Diffusion operator of component `k` at time level `m`.
    pub fn diffusion_operator(&self, k: usize, m: usize, grid: &Grid1D<T>) -> Result<DiffusionOperator<T>> {
        let nodal = self.diffusion[k].level_values(m, grid.nx());
        assemble_diffusion(&half_point_samples(&nodal), self.ellipticity_floor, grid)
    }

    /// `1 + max_{i<=j}(|a_ij| + |C_ij|^2 + |b_ij|^2)`, the energy growth scale.
    pub fn growth_bound(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let c = self.convection(i, j).sup_norm();
                let b = self.noise(i, j).sup_norm();
                worst = worst.max(self.reaction(i, j).sup_norm() + c * c + b * b);
            }
        }
        T::one() + worst
    }

    /// `max_{i<=j}(|a|^{2/(3(j-i)+3)} + |C|^{2/(3(j-i)+1)} + |b|^{2/(3(j-i)+1)})`.
    fn fractional_potential_max(&self) -> T {
        let two = cst::<T>(2.0);
        let three = cst::<T>(3.0);
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let gap = cst::<T>((j - i) as f64);
                let term = self.reaction(i, j).sup_norm().powf(two / (three * gap + three))
                    + self.convection(i, j).sup_norm().powf(two / (three * gap + T::one()))
                    + self.noise(i, j).sup_norm().powf(two / (three * gap + T::one()));
                worst = worst.max(term);
            }
        }
        worst
    }

    /// `max_{i<=j}` of the fractional powers plus `T (|a| + |C|^2 + |b|^2)`.
    fn cost_potential_max(&self, horizon: T) -> T {
        let two = cst::<T>(2.0);
        let three = cst::<T>(3.0);
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let gap = cst::<T>((j - i) as f64);
                let (a, c, b) =
                    (self.reaction(i, j).sup_norm(), self.convection(i, j).sup_norm(), self.noise(i, j).sup_norm());
                let term = a.powf(two / (three * gap + three))
                    + c.powf(two / (three * gap + T::one()))
                    + b.powf(two / (three * gap + T::one()))
                    + horizon * (a + c * c + b * b);
                worst = worst.max(term);
            }
        }
        worst
    }
}

/// One failed admissibility check.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Entry `(row, col)` of the given matrix must vanish by the cascade pattern.
    ForbiddenEntry { kind: CoefficientKind, row: usize, col: usize },
    /// `|a_{row,row-1}| < a_0` (for the better of the two sign orientations).
    CouplingFloor { row: usize, level: usize, point: usize, value: f64 },
    /// `beta^k < beta_0` at a nodal sample.
    Ellipticity { component: usize, level: usize, point: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForbiddenEntry { kind, row, col } => {
                write!(f, "structure: {kind}({},{}) must vanish", row + 1, col + 1)
            }
            Violation::CouplingFloor { row, level, point, value } => write!(
                f,
                "coupling: a({},{}) = {value} below floor at level {level}, point {}",
                row + 1,
                row,
                point + 1
            ),
            Violation::Ellipticity { component, level, point, value } => write!(
                f,
                "ellipticity: beta{} = {value} below floor at level {level}, point {}",
                component + 1,
                point + 1
            ),
        }
    }
}

/// Result of [`validate_structure`]; empty means admissible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the cascade pattern of `A`, `B`, `C`, the coupling floor on the
/// coupling region and the diffusion floor. Violations are returned as data.
pub fn validate_structure<T: Real>(coeffs: &CascadeCoefficients<T>, coupling: &SubdomainMask) -> ValidationReport {
    let n = coeffs.n();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i > j + 1 && !coeffs.reaction(i, j).is_zero() {
                violations.push(Violation::ForbiddenEntry { kind: CoefficientKind::Reaction, row: i, col: j });
            }
            for kind in [CoefficientKind::Convection, CoefficientKind::Noise] {
                if i > j && !coeffs.entry(kind, i, j).is_zero() {
                    violations.push(Violation::ForbiddenEntry { kind, row: i, col: j });
                }
            }
        }
    }

    let a0 = coeffs.coupling_floor();
    let points = coupling.indices();
    for i in 1..n {
        let field = coeffs.reaction(i, i - 1);
        let samples: Vec<(usize, usize, T)> =
            (0..field.time_samples()).flat_map(|m| points.iter().map(move |&j| (m, j, field.at(m, j)))).collect();
        let positive: Vec<_> = samples.iter().filter(|s| !(s.2 >= a0)).collect();
        let negative: Vec<_> = samples.iter().filter(|s| !(-s.2 >= a0)).collect();
        let failed = if negative.len() < positive.len() { negative } else { positive };
        violations.extend(failed.into_iter().map(|&(level, point, v)| Violation::CouplingFloor {
            row: i,
            level,
            point,
            value: v.to_f64().unwrap_or(f64::NAN),
        }));
    }

    let beta0 = coeffs.ellipticity_floor();
    for k in 0..n {
        let field = coeffs.diffusion(k);
        let width = match field {
            CoefficientField::Constant(_) => 1,
            CoefficientField::Spatial(v) => v.len(),
            CoefficientField::Sampled(l) => l.first().map_or(0, Vec::len),
        };
        for m in 0..field.time_samples() {
            for j in 0..width {
                let v = field.at(m, j);
                if !(v >= beta0) {
                    violations.push(Violation::Ellipticity {
                        component: k,
                        level: m,
                        point: j,
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Control-cost exponent
/// `K = 1 + T + 1/T + max_{i<=j}(|a|^{2/(3(j-i)+3)} + |C|^{2/(3(j-i)+1)} + |b|^{2/(3(j-i)+1)} + T(|a| + |C|^2 + |b|^2))`.
pub fn compute_k<T: Real>(coeffs: &CascadeCoefficients<T>, horizon: T) -> Result<T> {
    if !(horizon > T::zero()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    Ok(T::one() + horizon + horizon.recip() + coeffs.cost_potential_max(horizon))
}

/// Carleman parameter threshold
/// `lambda_0 = C0 (T + T^2 + T^2 max_{i<=j}(|a|^{2/(3(j-i)+3)} + |C|^{2/(3(j-i)+1)} + |b|^{2/(3(j-i)+1)}))`.
pub fn compute_lambda0<T: Real>(coeffs: &CascadeCoefficients<T>, horizon: T, c0: T) -> Result<T> {
    if !(horizon > T::zero()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if !(c0 > T::zero()) {
        return Err(Error::InvalidArgument(format!("calibration constant must be positive, got {c0}")));
    }
    let t2 = horizon * horizon;
    Ok(c0 * (horizon + t2 + t2 * coeffs.fractional_potential_max()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SubdomainRole, Subdomains};

    fn grid() -> Grid1D<f64> {
        Grid1D::new(31).unwrap()
    }

    #[test]
    fn admissible_two_component_cascade() {
        let g = grid();
        let s = Subdomains::default_for(&g).unwrap();
        let c = CascadeCoefficients::new(2)
            .unwrap()
            .with_reaction(1, 0, CoefficientField::Constant(1.0))
            .with_coupling_floor(0.5);
        assert!(validate_structure(&c, &s.coupling).is_admissible());
    }

    #[test]
    fn missing_coupling_fails_on_whole_region() {
        let g = grid();
        let s = Subdomains::default_for(&g).unwrap();
        let c = CascadeCoefficients::<f64>::new(2).unwrap();
        let report = validate_structure(&c, &s.coupling);
        assert_eq!(report.violations.len(), s.coupling.indices().len());
        assert!(report.violations.iter().all(|v| matches!(v, Violation::CouplingFloor { row: 1, .. })));
    }

    #[test]
    fn negative_coupling_is_admissible() {
        let g = grid();
        let s = Subdomains::default_for(&g).unwrap();
        let c =
            CascadeCoefficients::new(2).unwrap().with_reaction(1, 0, CoefficientField::indicator(&s.coupling, -2.0));
        assert!(validate_structure(&c, &s.coupling).is_admissible());
    }

    #[test]
    fn forbidden_entry_is_reported() {
        let g = grid();
        let mask = SubdomainMask::whole(&g, SubdomainRole::Coupling);
        let c = CascadeCoefficients::new(3)
            .unwrap()
            .with_reaction(1, 0, CoefficientField::Constant(1.0))
            .with_reaction(2, 1, CoefficientField::Constant(1.0))
            .with_reaction(2, 0, CoefficientField::Constant(0.1))
            .with_noise(1, 0, CoefficientField::Constant(0.1));
        let report = validate_structure(&c, &mask);
        assert!(report.violations.contains(&Violation::ForbiddenEntry {
            kind: CoefficientKind::Reaction,
            row: 2,
            col: 0
        }));
        assert!(report.violations.contains(&Violation::ForbiddenEntry {
            kind: CoefficientKind::Noise,
            row: 1,
            col: 0
        }));
        assert_eq!(report.violations.len(), 2);
        assert!(report.violations.iter().any(|v| v.to_string() == "structure: a(3,1) must vanish"));
    }

    #[test]
    fn k_worked_examples() {
        let zero = CascadeCoefficients::<f64>::new(2).unwrap();
        assert!((compute_k(&zero, 1.0).unwrap() - 3.0).abs() <= 1e-13);

        let a12 = CascadeCoefficients::new(2).unwrap().with_reaction(0, 1, CoefficientField::Constant(8.0));
        // j - i = 1 gives the exponent 2 / (3 + 3) = 1/3: K = 3 + 8^(1/3) + 8
        let expected = 3.0 + 8f64.cbrt() + 8.0;
        assert_eq!(expected, 13.0);
        assert!((compute_k(&a12, 1.0).unwrap() - expected).abs() <= 1e-13);

        let b11 = CascadeCoefficients::<f64>::new(1).unwrap().with_noise(0, 0, CoefficientField::Constant(1.0));
        assert!((compute_k(&b11, 2.0).unwrap() - 6.5).abs() <= 1e-13);

        assert!(compute_k(&zero, 0.0).is_err());
    }

    #[test]
    fn lambda0_worked_examples() {
        let zero = CascadeCoefficients::<f64>::new(2).unwrap();
        assert!((compute_lambda0(&zero, 2.0, 1.0).unwrap() - 6.0).abs() <= 1e-13);
        assert!((compute_lambda0(&zero, 1.0, 3.0).unwrap() - 6.0).abs() <= 1e-13);
        let a21 = CascadeCoefficients::<f64>::new(2).unwrap().with_reaction(1, 0, CoefficientField::Constant(27.0));
        assert!((compute_lambda0(&a21, 1.0, 1.0).unwrap() - 2.0).abs() <= 1e-13);
        assert!(compute_lambda0(&zero, 1.0, 0.0).is_err());
        assert!(compute_lambda0(&zero, -1.0, 1.0).is_err());
    }

    #[test]
    fn k_blows_up_for_short_horizons() {
        let zero = CascadeCoefficients::<f64>::new(1).unwrap();
        assert!(compute_k(&zero, 1e-3).unwrap() > compute_k(&zero, 1.0).unwrap());
    }

    #[test]
    fn sampled_fields_are_shape_checked() {
        let g = Grid1D::<f64>::new(5).unwrap();
        let tree = ScenarioTree::new(2, 1.0).unwrap();
        let ok =
            CascadeCoefficients::new(1).unwrap().with_reaction(0, 0, CoefficientField::Sampled(vec![vec![1.0; 5]; 3]));
        assert!(ok.check_discretization(&g, &tree).is_ok());
        let short = ok.clone().with_reaction(0, 0, CoefficientField::Sampled(vec![vec![1.0; 5]; 2]));
        assert!(short.check_discretization(&g, &tree).is_err());
        let wrong = ok.with_noise(0, 0, CoefficientField::Spatial(vec![1.0; 4]));
        assert!(wrong.check_discretization(&g, &tree).is_err());
    }

    #[test]
    fn sup_norms_and_coupling_bound() {
        let c = CascadeCoefficients::new(3)
            .unwrap()
            .with_reaction(1, 0, CoefficientField::Spatial(vec![0.5, -3.0, 1.0]))
            .with_reaction(2, 1, CoefficientField::Constant(2.0));
        assert_eq!(c.coupling_bound(), 3.0);
        assert_eq!(c.growth_bound(), 1.0);
    }
}
