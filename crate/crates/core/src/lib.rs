//! Rearrangement calculus, radial comparison functions and a Robin torsion
//! solver on rasterized planar domains.
//!
//! The crate is organized around four layers:
//!
//! - [`rearrange`]: exact rearrangement calculus on measure-weighted samples
//!   and step profiles (distribution functions, decreasing/increasing
//!   rearrangements, Lorentz norms, Hardy-Littlewood and contraction checks,
//!   pseudo-rearrangements).
//! - [`grid`] and [`field`]: rasterized planar domains with sub-cell boundary
//!   reconstruction, cell-sampled fields, discrete gradients and boundary
//!   trace integrals.
//! - [`symmetrize`]: the radial comparison function with equi-rearranged
//!   gradient and trace-preserving boundary value, and every comparison
//!   inequality evaluated on it.
//! - [`robin`]: a finite-volume Robin solver, torsion functionals and the
//!   closed-form ball oracles they are compared against.

pub mod field;
pub mod grid;
pub mod measure;
pub mod numeric;
pub mod radial;
pub mod rearrange;
pub mod robin;
pub mod symmetrize;

pub use field::{
    boundary_trace_integral, field_to_samples, gradient_components, gradient_magnitude,
    gradient_sup, integral, ScalarField,
};
pub use grid::{BoundarySegment, CellInfo, DomainSpec, GridDomain, GridError, ShapeSpec};
pub use measure::MeasureConstants;
pub use radial::{RadialFunction, RadialPiece};
pub use rearrange::{
    contraction_check, hardy_littlewood_check, product_integral, pseudo_rearrangement,
    ContractionCheck, HardyLittlewoodCheck, LorentzParams, Monotonicity, RearrangeError,
    StepProfile, WeightedSamples,
};
pub use robin::{
    ball_weighted_energy, compare_torsion, compare_weighted_torsion, exact_ball_solution,
    exact_ball_torsion, nonlinear_functional_eval, nonlinear_functional_radial, solve_robin,
    torsion_functional, torsion_rigidity, RobinProblem, RobinSolution, SolveError,
    TorsionComparison, TorsionResult, TorsionSummary, TORSION_SLACK,
};
pub use symmetrize::{
    build_ustar, check_weight_condition, comparison_tolerance, essosc_check, gn_radial_solution,
    l1_compare, lorentz_compare, pointwise_bound_check, talenti_lorentz_formula, trace_lp_check,
    weighted_compare, ComparisonRecord, EssoscCheck, PointwiseBound, ScalarMap, SymmetrizeError,
    Verdict, WeightConditionCheck, COMPARISON_SLACK,
};
