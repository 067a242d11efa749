//! Numerical lab for null controllability of cascade systems of backward
//! stochastic parabolic equations driven by a single distributed control.
//!
//! Brownian motion is realized on a non-recombining binary scenario tree,
//! space by second-order finite differences on `(0, 1)` with Dirichlet
//! boundaries. Everything is generic over the scalar type; the aliases at the
//! bottom fix it to `f64`.

// `!(x > 0)` style guards are deliberate: they reject NaN alongside the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adjoint;
pub mod backward;
pub mod benchmarks;
pub mod carleman;
pub mod error;
pub mod grid;
pub mod hum;
pub mod linalg;
pub mod model;
pub mod observability;
mod ops;
pub mod scalar;
pub mod tree;

pub use adjoint::{check_gronwall, energy_history, solve_adjoint, AdjointSources, AdjointTrajectory, GronwallReport};
pub use backward::{
    duality_gap, solve_backward, solve_backward_direct, solve_backward_transpose, BackwardTrajectory, ControlField,
    Scheme,
};
pub use benchmarks::Setup;
pub use carleman::{
    build_psi, carleman_check_cascade, carleman_check_single, carleman_functional_i, carleman_lambda_sweep,
    eval_weights, CarlemanRow, CarlemanWeights, CascadeCheck, LogValue, SingleCheck,
};
pub use error::{Error, Result};
pub use grid::{
    assemble_diffusion, divergence_of_product, gradient, half_point_samples, l2_inner, DiffusionOperator, Grid1D,
    SubdomainMask, SubdomainRole, Subdomains,
};
pub use hum::{
    apply_gramian, certify_uniform_estimate, synthesize_control, CgOptions, HumResult, UniformEstimateReport,
};
pub use model::{
    compute_k, compute_lambda0, validate_structure, CascadeCoefficients, CoefficientField, CoefficientKind,
    ValidationReport, Violation,
};
pub use observability::{
    assemble_gramian, cost_sweep, estimate_observability_constant, unique_continuation_probe, CostSweepRow,
    GramianMatrix, Observability, SpectrumReport, UniqueContinuationReport,
};
pub use scalar::Real;
pub use tree::{
    build_tree, conditional_expectation, expectation, martingale_coefficient, AdaptedField, LevelValues, ScenarioTree,
};

pub type Tree = ScenarioTree<f64>;
pub type Field = AdaptedField<f64>;
pub type Grid = Grid1D<f64>;
pub type Coefficients = CascadeCoefficients<f64>;
pub type Coefficient = CoefficientField<f64>;
pub type Adjoint = AdjointTrajectory<f64>;
pub type Backward = BackwardTrajectory<f64>;
pub type Control = ControlField<f64>;
pub type Weights = CarlemanWeights<f64>;
pub type Gramian = GramianMatrix<f64>;
pub type Hum = HumResult<f64>;
