//! Finite-volume Robin solver for `-Δu = f` with boundary condition
//! `∂u/∂ν + β |∂Ω| u = 0`, the torsion functionals built on it, and the
//! exact radial solution on the ball used as the comparison oracle.
//!
//! The coefficient of the boundary condition couples `β` with the domain
//! perimeter exactly as in the torsion functional; this normalization is
//! what makes the symmetrized comparison hold without extra perimeter
//! factors.

use serde::Serialize;
use thiserror::Error;

use crate::field::{
    boundary_trace_integral, gradient_magnitude, integral, ScalarField,
};
use crate::grid::{GridDomain, GridError};
use crate::measure::MeasureConstants;
use crate::numeric::{csum, power_integral, CompensatedSum};
use crate::radial::{RadialError, RadialFunction};
use crate::rearrange::StepProfile;
use crate::symmetrize::{ComparisonRecord, SymmetrizeError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Symmetrize(#[from] SymmetrizeError),
    #[error("beta must be positive, got {0}")]
    InvalidBeta(f64),
    #[error("conjugate gradients did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("normalization degenerate: integral of w vanishes")]
    DegenerateNormalization,
    #[error("p must be >= 1, got {0}")]
    InvalidExponent(f64),
}

/// Slack coefficient for torsion comparison verdicts: first-order boundary
/// discretization, sized on the disk oracle at h = 1/128.
pub const TORSION_SLACK: f64 = 3.0;

/// `-Δu = source` on the domain with `∂u/∂ν + β |∂Ω| u = 0` on the boundary.
#[derive(Debug, Clone)]
pub struct RobinProblem<'a> {
    pub domain: &'a GridDomain,
    pub beta: f64,
    pub source: ScalarField,
    /// The coefficient entering the boundary condition, `β |∂Ω|`.
    pub perimeter_weight: f64,
}

impl<'a> RobinProblem<'a> {
    /// Unit source; the torsion problem.
    pub fn new(domain: &'a GridDomain, beta: f64) -> Result<Self, SolveError> {
        let source = ScalarField::constant(domain, 1.0)?;
        Self::with_source(domain, beta, source)
    }

    pub fn with_source(
        domain: &'a GridDomain,
        beta: f64,
        source: ScalarField,
    ) -> Result<Self, SolveError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(SolveError::InvalidBeta(beta));
        }
        source.check_domain(domain)?;
        Ok(Self { domain, beta, source, perimeter_weight: beta * domain.perimeter() })
    }
}

/// Solution of a Robin problem with solver diagnostics.
#[derive(Debug, Clone)]
pub struct RobinSolution {
    pub field: ScalarField,
    /// Relative residual at termination.
    pub residual: f64,
    pub iterations: usize,
    /// Discrete weak-form energy `u^T A u`.
    pub energy: f64,
    /// `∫ u dx`.
    pub integral: f64,
}

/// Flux-form five-point operator: off-diagonal couplings between active
/// neighbors weighted by the inside fraction of the shared face, plus Robin
/// terms on the boundary segments.
struct RobinMatrix {
    diag: Vec<f64>,
    nbrs: Vec<[i32; 4]>,
    weights: Vec<[f64; 4]>,
    /// Symmetric couplings `(i, j, w)` from merged boundary slivers.
    extra: Vec<(u32, u32, f64)>,
}

impl RobinMatrix {
    fn assemble(domain: &GridDomain, beta: f64) -> Self {
        let n = domain.n_cells();
        let h = domain.spacing();
        let pw = beta * domain.perimeter();
        let mut diag = vec![0.0; n];
        let mut nbrs = vec![[-1i32; 4]; n];
        let mut weights = vec![[0.0f64; 4]; n];
        for i in 0..n {
            for (k, (dx, dy)) in [(1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().enumerate() {
                if let Some(j) = domain.neighbor(i, dx, dy) {
                    // The face fraction is stored symmetrically on both
                    // cells; a small floor keeps active couplings alive at
                    // degenerate cuts.
                    let w = domain.cells()[i].face_inside[k].max(1e-3);
                    nbrs[i][k] = j as i32;
                    weights[i][k] = w;
                    diag[i] += w;
                }
            }
        }
        // Slivers merged into a neighbor leave their faces toward other
        // active cells as couplings of the merged control volume.
        let mut extra = Vec::with_capacity(domain.merged_faces().len());
        for mf in domain.merged_faces() {
            extra.push((mf.owner as u32, mf.other as u32, mf.inside));
            diag[mf.owner] += mf.inside;
            diag[mf.other] += mf.inside;
        }
        // Ghost-value elimination at segment midpoints: with the Robin
        // condition holding at the midpoint a normal distance delta from the
        // cell center, u(mid) = u_i / (1 + delta beta |∂Ω|).
        for seg in domain.segments() {
            let c = &domain.cells()[seg.cell];
            let delta = ((seg.midpoint[0] - c.center[0]) * seg.normal[0]
                + (seg.midpoint[1] - c.center[1]) * seg.normal[1])
                .clamp(0.1 * h, h);
            diag[seg.cell] += pw * seg.length / (1.0 + delta * pw);
        }
        // An isolated cell without boundary segments cannot occur on a
        // connected raster, but keep the system nonsingular.
        for d in diag.iter_mut() {
            if *d == 0.0 {
                *d = 1.0;
            }
        }
        Self { diag, nbrs, weights, extra }
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..x.len() {
            let mut v = self.diag[i] * x[i];
            for (k, &j) in self.nbrs[i].iter().enumerate() {
                if j >= 0 {
                    v -= self.weights[i][k] * x[j as usize];
                }
            }
            y[i] = v;
        }
        for &(i, j, w) in &self.extra {
            y[i as usize] -= w * x[j as usize];
            y[j as usize] -= w * x[i as usize];
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.matvec(x, &mut ax);
        csum(x.iter().zip(&ax).map(|(a, b)| a * b))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients down to the relative residual
/// `tol`, iteration cap `50 * (nx + ny)`.
pub fn solve_robin(problem: &RobinProblem, tol: f64) -> Result<RobinSolution, SolveError> {
    let domain = problem.domain;
    let matrix = RobinMatrix::assemble(domain, problem.beta);
    let b: Vec<f64> = problem
        .source
        .values()
        .iter()
        .zip(domain.cells())
        .map(|(f, c)| f * c.area)
        .collect();
    let bnorm = dot(&b, &b).sqrt();
    let n = b.len();

    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        let field = ScalarField::from_values(domain, x)?;
        return Ok(RobinSolution { field, residual: 0.0, iterations: 0, energy: 0.0, integral: 0.0 });
    }

    let (nx, ny) = domain.raster_size();
    let max_iter = 50 * (nx + ny);

    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&matrix.diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut residual = 1.0;
    let mut iterations = 0;

    for it in 0..max_iter {
        matrix.matvec(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        residual = dot(&r, &r).sqrt() / bnorm;
        iterations = it + 1;
        if residual <= tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / matrix.diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta_cg = rz_new / rz;
        for i in 0..n {
            p[i] = z[i] + beta_cg * p[i];
        }
        rz = rz_new;
    }
    if residual > tol {
        return Err(SolveError::NonConvergence { residual, iterations });
    }

    // The recurred CG residual can descend below the attainable level of the
    // true residual; report the latter.
    matrix.matvec(&x, &mut q);
    let true_rr: f64 = b.iter().zip(&q).map(|(bi, qi)| (bi - qi) * (bi - qi)).sum();
    let residual = residual.max(true_rr.sqrt() / bnorm);

    let energy = matrix.energy(&x);
    // The discrete operator is an M-matrix, so the solution is positive for
    // nonnegative sources up to solver rounding; clamp that rounding away.
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    debug_assert!(min > -1e-8 * x.iter().copied().fold(0.0, f64::max).max(1.0));
    let values: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
    let field = ScalarField::from_values(domain, values)?;
    let integral_u = integral(domain, &field)?;
    Ok(RobinSolution { field, residual, iterations, energy, integral: integral_u })
}

/// The quotient functional whose minimum is the torsional rigidity:
/// `(∫ |∇w|^2 + β |∂Ω| ∫_∂Ω w^2) / (∫ w)^2`.
pub fn torsion_functional(
    domain: &GridDomain,
    w: &ScalarField,
    beta: f64,
) -> Result<f64, SolveError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SolveError::InvalidBeta(beta));
    }
    let grad = gradient_magnitude(domain, w)?;
    let dirichlet = csum(
        grad.values()
            .iter()
            .zip(domain.cells())
            .map(|(g, c)| g * g * c.area),
    );
    let boundary = beta * domain.perimeter() * boundary_trace_integral(domain, w, 2.0)?;
    let mass = integral(domain, w)?;
    if mass.abs() < 1e-300 {
        return Err(SolveError::DegenerateNormalization);
    }
    Ok((dirichlet + boundary) / (mass * mass))
}

/// Torsion data at the PDE solution.
#[derive(Debug, Clone)]
pub struct TorsionResult {
    pub field: ScalarField,
    /// `T(Ω, β)`: the discrete weak-form energy over `(∫u)^2`.
    pub torsion: f64,
    pub integral: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Machine-readable summary of a torsion run.
#[derive(Debug, Clone, Serialize)]
pub struct TorsionSummary {
    pub beta: f64,
    pub area: f64,
    pub perimeter: f64,
    pub torsion: f64,
    pub integral: f64,
    pub residual: f64,
    pub h: f64,
}

impl TorsionResult {
    pub fn summary(&self, domain: &GridDomain, beta: f64) -> TorsionSummary {
        TorsionSummary {
            beta,
            area: domain.area(),
            perimeter: domain.perimeter(),
            torsion: self.torsion,
            integral: self.integral,
            residual: self.residual,
            h: domain.spacing(),
        }
    }
}

/// Solves the torsion problem and evaluates `T = energy / (∫u)^2` at the
/// solution. The weak-form identity `T ∫u = 1` is checked by the caller
/// against the independently accumulated energy.
pub fn torsion_rigidity(
    domain: &GridDomain,
    beta: f64,
    tol: f64,
) -> Result<TorsionResult, SolveError> {
    let problem = RobinProblem::new(domain, beta)?;
    let sol = solve_robin(&problem, tol)?;
    let torsion = sol.energy / (sol.integral * sol.integral);
    Ok(TorsionResult {
        field: sol.field,
        torsion,
        integral: sol.integral,
        energy: sol.energy,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Exact solution of `-Δz = 1` on the ball of radius `R` with
/// `∂z/∂ν + β |∂B_R| z = 0`:
/// `z(r) = (R^2 - r^2) / (2n) + R / (n β |∂B_R|)`.
pub fn exact_ball_solution(
    radius: f64,
    beta: f64,
    constants: &MeasureConstants,
) -> Result<RadialFunction, SolveError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SolveError::InvalidBeta(beta));
    }
    let nf = constants.dim_f();
    let sphere = constants.sphere_measure(radius);
    let a = radius * radius / (2.0 * nf) + radius / (nf * beta * sphere);
    Ok(RadialFunction::single_quadratic(
        *constants,
        radius,
        a,
        0.0,
        -1.0 / (2.0 * nf),
    )?)
}

/// Closed-form `T(B_R, β) = 1 / ∫ z`, with
/// `∫ z = omega_n R^{n+2} / (n (n+2)) + R^2 / (n^2 β)`.
pub fn exact_ball_torsion(radius: f64, beta: f64, constants: &MeasureConstants) -> f64 {
    let nf = constants.dim_f();
    let omega = constants.unit_ball_measure();
    let mass = omega * radius.powf(nf + 2.0) / (nf * (nf + 2.0)) + radius * radius / (nf * nf * beta);
    1.0 / mass
}

/// Torsion comparison between a domain and its equal-measure ball.
#[derive(Debug)]
pub struct TorsionComparison {
    pub record: ComparisonRecord,
    pub numeric: TorsionResult,
    /// Analytic `T(Ω*, β)`.
    pub ball_torsion: f64,
}

/// `T(Ω, β) >= T(Ω*, β)`: the ball side is always evaluated from the closed
/// form, never re-meshed, so the verdict carries a single discretization
/// error source.
pub fn compare_torsion(
    domain: &GridDomain,
    beta: f64,
    constants: &MeasureConstants,
    tol: f64,
) -> Result<TorsionComparison, SolveError> {
    let numeric = torsion_rigidity(domain, beta, tol)?;
    let radius = domain.schwarz_radius(constants);
    let ball_torsion = exact_ball_torsion(radius, beta, constants);
    let tolerance = TORSION_SLACK * domain.spacing() * ball_torsion;
    let record = ComparisonRecord::asserted(
        format!("torsion(beta={beta})"),
        ball_torsion,
        numeric.torsion,
        tolerance,
    );
    Ok(TorsionComparison { record, numeric, ball_torsion })
}

/// Energy of the source-weighted torsion problem:
/// `1/2 ∫ |∇w|^2 + (β |∂Ω| / 2) ∫_∂Ω w^2 - ∫ w f`.
pub fn weighted_torsion_energy(
    domain: &GridDomain,
    w: &ScalarField,
    beta: f64,
    f: &ScalarField,
) -> Result<f64, SolveError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SolveError::InvalidBeta(beta));
    }
    w.check_domain(domain)?;
    f.check_domain(domain)?;
    let grad = gradient_magnitude(domain, w)?;
    let dirichlet = csum(
        grad.values()
            .iter()
            .zip(domain.cells())
            .map(|(g, c)| g * g * c.area),
    );
    let boundary = beta * domain.perimeter() * boundary_trace_integral(domain, w, 2.0)?;
    let coupling = csum(
        w.values()
            .iter()
            .zip(f.values())
            .zip(domain.cells())
            .map(|((a, b), c)| a * b * c.area),
    );
    Ok(0.5 * dirichlet + 0.5 * boundary - coupling)
}

/// Minimum of the weighted torsion energy on the equal-measure ball with the
/// symmetrized source, in closed form.
///
/// With `A(s) = ∫_0^s f*`, the radial solution has flux
/// `-v'(r) = A(omega_n r^n) / (n omega_n r^{n-1})` and Robin value
/// `v(R) = ∫f / (β |∂B|^2)`; the minimum energy is `-1/2 ∫ f# v`, and
/// `∫ f# v = v(R) ∫f + (1 / (n^2 omega_n^{2/n})) ∫_0^{|B|} A(s)^2 s^{2/n - 2} ds`.
pub fn ball_weighted_energy(
    fstar: &StepProfile,
    beta: f64,
    constants: &MeasureConstants,
) -> Result<f64, SolveError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SolveError::InvalidBeta(beta));
    }
    if !fstar.values_nonincreasing() {
        return Err(SolveError::Symmetrize(SymmetrizeError::RequiresNonincreasing));
    }
    let nf = constants.dim_f();
    let omega = constants.unit_ball_measure();
    let total = fstar.total_measure();
    let radius = constants.ball_radius(total);
    let sphere = constants.sphere_measure(radius);
    let f_total = fstar.integral();
    let v_boundary = f_total / (beta * sphere * sphere);

    let kappa = 2.0 / nf - 2.0;
    let mut acc = CompensatedSum::new();
    let mut cum = CompensatedSum::new();
    for (lo, hi, value) in fstar.segments() {
        // A(s) = alpha + gamma s on this segment.
        let a_lo = cum.total();
        let gamma = value;
        let alpha = a_lo - gamma * lo;
        if alpha != 0.0 {
            acc.add(alpha * alpha * power_integral(lo, hi, kappa));
        }
        if alpha != 0.0 && gamma != 0.0 {
            acc.add(2.0 * alpha * gamma * power_integral(lo, hi, kappa + 1.0));
        }
        if gamma != 0.0 {
            acc.add(gamma * gamma * power_integral(lo, hi, kappa + 2.0));
        }
        cum.add(value * (hi - lo));
    }
    let coupling =
        v_boundary * f_total + acc.total() / (nf * nf * omega.powf(2.0 / nf));
    Ok(-0.5 * coupling)
}

/// Weighted torsion comparison: the numeric energy minimum on the domain
/// against the closed-form minimum on the ball with the rearranged source.
/// Requires the weight to satisfy the averaged weight condition.
pub fn compare_weighted_torsion(
    domain: &GridDomain,
    beta: f64,
    f: &ScalarField,
    constants: &MeasureConstants,
    tol: f64,
) -> Result<ComparisonRecord, SolveError> {
    let fstar = crate::field::field_to_samples(domain, f)
        .map_err(SymmetrizeError::from)?
        .decreasing_rearrangement();
    let condition = crate::symmetrize::check_weight_condition(&fstar, constants.dim())?;
    if !condition.holds {
        return Err(SolveError::Symmetrize(SymmetrizeError::WeightHypothesis(
            condition.first_violation.map_or(0.0, |v| v.t),
        )));
    }
    let problem = RobinProblem::with_source(domain, beta, f.clone())?;
    let sol = solve_robin(&problem, tol)?;
    let domain_energy = weighted_torsion_energy(domain, &sol.field, beta, f)?;
    let ball_energy = ball_weighted_energy(&fstar, beta, constants)?;
    let tolerance = TORSION_SLACK * domain.spacing() * ball_energy.abs().max(1.0);
    Ok(ComparisonRecord::asserted(
        format!("weighted-torsion(beta={beta})"),
        ball_energy,
        domain_energy,
        tolerance,
    ))
}

/// The p-homogeneous torsion-type quotient
/// `(∫ |∇w|^p + β |∂Ω|^{p-1} ∫_∂Ω w^p) / (∫ w)^p`. Functional evaluation
/// only; no p-Laplacian solve.
pub fn nonlinear_functional_eval(
    domain: &GridDomain,
    w: &ScalarField,
    beta: f64,
    p: f64,
) -> Result<f64, SolveError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SolveError::InvalidBeta(beta));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(SolveError::InvalidExponent(p));
    }
    let grad = gradient_magnitude(domain, w)?;
    let dirichlet = csum(
        grad.values()
            .iter()
            .zip(domain.cells())
            .map(|(g, c)| g.powf(p) * c.area),
    );
    let boundary = beta
        * domain.perimeter().powf(p - 1.0)
        * boundary_trace_integral(domain, w, p)?;
    let mass = integral(domain, w)?;
    if mass.abs() < 1e-300 {
        return Err(SolveError::DegenerateNormalization);
    }
    Ok((dirichlet + boundary) / mass.powf(p))
}

/// The same quotient evaluated on a radial comparison function: the gradient
/// term is the p-th power integral of its measure-variable profile, the
/// boundary term is exact since the function is constant on the sphere.
pub fn nonlinear_functional_radial(
    ustar: &RadialFunction,
    beta: f64,
    p: f64,
) -> Result<f64, SolveError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SolveError::InvalidBeta(beta));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(SolveError::InvalidExponent(p));
    }
    let grad = ustar
        .gradient_profile()
        .ok_or(SolveError::Symmetrize(SymmetrizeError::RequiresNonincreasing))?;
    let dirichlet = csum(grad.steps().iter().map(|s| s.value.powf(p) * s.len));
    let sphere = ustar.constants().sphere_measure(ustar.r_max());
    let boundary =
        beta * sphere.powf(p - 1.0) * ustar.boundary_value().powf(p) * sphere;
    let mass = ustar.l1_norm();
    if mass.abs() < 1e-300 {
        return Err(SolveError::DegenerateNormalization);
    }
    Ok((dirichlet + boundary) / mass.powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetrize::build_ustar;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-10;

    #[test]
    fn zero_source_gives_zero_solution() {
        let d = GridDomain::disk([0.0, 0.0], 1.0, 1.0 / 16.0).unwrap();
        let zero = ScalarField::constant(&d, 0.0).unwrap();
        let p = RobinProblem::with_source(&d, 1.0, zero).unwrap();
        let sol = solve_robin(&p, TOL).unwrap();
        assert!(sol.field.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn disk_solution_matches_exact_ball() {
        let d = GridDomain::disk([0.0, 0.0], 1.0, 1.0 / 64.0).unwrap();
        let p = RobinProblem::new(&d, 1.0).unwrap();
        let sol = solve_robin(&p, TOL).unwrap();
        let z = exact_ball_solution(1.0, 1.0, &MeasureConstants::planar()).unwrap();
        let mut max_err: f64 = 0.0;
        for (c, v) in d.cells().iter().zip(sol.field.values()) {
            let r = c.center[0].hypot(c.center[1]);
            max_err = max_err.max((v - z.value_at(r)).abs());
        }
        assert!(max_err <= 1.0 / 64.0, "max error {max_err}");
    }

    #[test]
    fn large_beta_approaches_dirichlet() {
        let d = GridDomain::disk([0.0, 0.0], 1.0, 1.0 / 128.0).unwrap();
        let p = RobinProblem::new(&d, 1e6).unwrap();
        let sol = solve_robin(&p, 1e-12).unwrap();
        // The boundary value of the solution collapses to the Dirichlet
        // limit: the ghost-reconstructed value at r = 1 stays below 1e-3.
        let h = d.spacing();
        let pw = 1e6 * d.perimeter();
        let trace_sup = d
            .segments()
            .iter()
            .map(|s| {
                let c = &d.cells()[s.cell];
                let delta = ((s.midpoint[0] - c.center[0]) * s.normal[0]
                    + (s.midpoint[1] - c.center[1]) * s.normal[1])
                    .clamp(0.1 * h, h);
                sol.field.values()[s.cell] / (1.0 + delta * pw)
            })
            .fold(0.0f64, f64::max);
        assert!(trace_sup < 1e-3, "boundary value {trace_sup}");
        // Interior agreement with (1 - r^2)/4 at first order in h.
        let mut worst: f64 = 0.0;
        for (c, v) in d.cells().iter().zip(sol.field.values()) {
            let r = c.center[0].hypot(c.center[1]);
            worst = worst.max((v - (1.0 - r * r) / 4.0).abs());
        }
        assert!(worst < 0.5 / 128.0, "interior deviation {worst}");
    }

    #[test]
    fn positivity_of_torsion_function() {
        let d = GridDomain::l_shape(1.0 / 32.0).unwrap();
        let p = RobinProblem::new(&d, 1.0).unwrap();
        let sol = solve_robin(&p, TOL).unwrap();
        assert!(sol.field.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn exact_ball_values() {
        let c = MeasureConstants::planar();
        let z = exact_ball_solution(1.0, 1.0, &c).unwrap();
        assert!((z.value_at(1.0) - 1.0 / (4.0 * PI)).abs() < 1e-14);
        assert!((z.value_at(0.0) - (0.25 + 1.0 / (4.0 * PI))).abs() < 1e-14);
        let mass = z.l1_norm();
        assert!((mass - (PI / 8.0 + 0.25)).abs() < 1e-13);
        let t = exact_ball_torsion(1.0, 1.0, &c);
        assert!((t - 1.0 / (PI / 8.0 + 0.25)).abs() < 1e-12);
        assert!((t - 1.555938).abs() < 1e-5);
        // Dual arithmetic for the mass: closed form against the piecewise
        // radial integral.
        assert!((1.0 / t - mass).abs() < 1e-13);
    }

    #[test]
    fn beta_limit_of_exact_ball() {
        let c = MeasureConstants::planar();
        let z = exact_ball_solution(1.0, 1e9, &c).unwrap();
        for r in [0.0, 0.5, 1.0] {
            assert!((z.value_at(r) - (1.0 - r * r) / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn torsion_functional_constants() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let one = ScalarField::constant(&d, 1.0).unwrap();
        let f1 = torsion_functional(&d, &one, 1.0).unwrap();
        assert!((f1 - 16.0).abs() < 1e-9, "{f1}");
        // Degree-zero homogeneity.
        let c = ScalarField::constant(&d, 3.7).unwrap();
        let fc = torsion_functional(&d, &c, 1.0).unwrap();
        assert!((fc - f1).abs() < 1e-9);
    }

    #[test]
    fn weak_form_identity() {
        let d = GridDomain::unit_square(1.0 / 48.0).unwrap();
        let t = torsion_rigidity(&d, 1.0, TOL).unwrap();
        assert!(
            (t.torsion * t.integral - 1.0).abs() < 10.0 * TOL.max(1e-12) * 1e2,
            "T*int = {}",
            t.torsion * t.integral
        );
    }

    #[test]
    fn disk_torsion_close_to_exact() {
        let d = GridDomain::disk([0.0, 0.0], 1.0, 1.0 / 64.0).unwrap();
        let t = torsion_rigidity(&d, 1.0, TOL).unwrap();
        let exact = exact_ball_torsion(1.0, 1.0, &MeasureConstants::planar());
        assert!((t.torsion - exact).abs() < 0.03 * exact, "{} vs {exact}", t.torsion);
        // The quotient functional evaluated through cell gradients agrees to
        // first order.
        let func = torsion_functional(&d, &t.field, 1.0).unwrap();
        assert!((func - t.torsion).abs() < 0.05 * t.torsion);
    }

    #[test]
    fn disk_error_refines_at_first_order() {
        let z = exact_ball_solution(1.0, 1.0, &MeasureConstants::planar()).unwrap();
        let max_err = |h: f64| {
            let d = GridDomain::disk([0.0, 0.0], 1.0, h).unwrap();
            let sol = solve_robin(&RobinProblem::new(&d, 1.0).unwrap(), TOL).unwrap();
            d.cells()
                .iter()
                .zip(sol.field.values())
                .map(|(c, v)| (v - z.value_at(c.center[0].hypot(c.center[1]))).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = max_err(1.0 / 32.0);
        let fine = max_err(1.0 / 64.0);
        assert!(
            fine * 1.5 <= coarse || fine < 1e-5,
            "max errors {coarse:.2e} -> {fine:.2e}"
        );
    }

    #[test]
    fn square_torsion_self_convergence() {
        // No closed form on the square: successive grids must approach the
        // fine-grid reference monotonically.
        let t = |h: f64| torsion_rigidity(&GridDomain::unit_square(h).unwrap(), 1.0, TOL)
            .unwrap()
            .torsion;
        let reference = t(1.0 / 128.0);
        let e32 = (t(1.0 / 32.0) - reference).abs();
        let e64 = (t(1.0 / 64.0) - reference).abs();
        assert!(e64 < e32, "self-convergence: {e32:.2e} -> {e64:.2e}");
        assert!(e64 < 0.01 * reference, "residual gap {e64:.2e} vs T={reference}");
    }

    #[test]
    fn torsion_monotone_in_beta() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let t_half = torsion_rigidity(&d, 0.5, TOL).unwrap().torsion;
        let t_one = torsion_rigidity(&d, 1.0, TOL).unwrap().torsion;
        let t_two = torsion_rigidity(&d, 2.0, TOL).unwrap().torsion;
        assert!(t_half <= t_one && t_one <= t_two, "{t_half} {t_one} {t_two}");
    }

    #[test]
    fn square_solution_has_full_symmetry() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let sol = solve_robin(&RobinProblem::new(&d, 1.0).unwrap(), 1e-12).unwrap();
        let u = sol.field.values();
        let n = 32i64;
        let scale = u.iter().copied().fold(0.0, f64::max);
        let lookup = |ix: i64, iy: i64| {
            // Cells sit inside a padded raster; recover the offset from cell 0.
            let c0 = &d.cells()[0];
            d.cell_at(c0.ix as i64 + ix, c0.iy as i64 + iy).unwrap()
        };
        for ix in 0..n {
            for iy in 0..n {
                let v = u[lookup(ix, iy)];
                for (jx, jy) in [
                    (iy, ix),
                    (n - 1 - ix, iy),
                    (ix, n - 1 - iy),
                    (n - 1 - ix, n - 1 - iy),
                    (iy, n - 1 - ix),
                    (n - 1 - iy, ix),
                    (n - 1 - iy, n - 1 - ix),
                ] {
                    let w = u[lookup(jx, jy)];
                    assert!((v - w).abs() < 1e-8 * scale, "({ix},{iy}) vs ({jx},{jy})");
                }
            }
        }
    }

    #[test]
    fn compare_torsion_on_disk_is_tight() {
        let d = GridDomain::disk([0.0, 0.0], 1.0, 1.0 / 64.0).unwrap();
        let cmp = compare_torsion(&d, 1.0, &MeasureConstants::planar(), TOL).unwrap();
        assert!(cmp.record.holds());
        assert!((cmp.record.lhs - cmp.record.rhs).abs() < cmp.record.tolerance);
    }

    #[test]
    fn compare_torsion_on_square() {
        let d = GridDomain::unit_square(1.0 / 48.0).unwrap();
        let cmp = compare_torsion(&d, 1.0, &MeasureConstants::planar(), TOL).unwrap();
        assert!(cmp.record.holds());
        assert!(cmp.record.margin() > cmp.record.tolerance, "{:?}", cmp.record);
    }

    #[test]
    fn weighted_energy_of_zero_field() {
        let d = GridDomain::unit_square(1.0 / 16.0).unwrap();
        let zero = ScalarField::constant(&d, 0.0).unwrap();
        let one = ScalarField::constant(&d, 1.0).unwrap();
        let e = weighted_torsion_energy(&d, &zero, 1.0, &one).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn minimizer_energy_is_half_mass() {
        let d = GridDomain::unit_square(1.0 / 64.0).unwrap();
        let one = ScalarField::constant(&d, 1.0).unwrap();
        let sol = solve_robin(&RobinProblem::new(&d, 1.0).unwrap(), TOL).unwrap();
        let e = weighted_torsion_energy(&d, &sol.field, 1.0, &one).unwrap();
        let expect = -0.5 * sol.integral;
        // The quotient pieces use cell gradients, so this identity holds to
        // first order in h.
        assert!((e - expect).abs() < 2.0 * d.spacing() * sol.integral.max(0.01), "{e} vs {expect}");
    }

    #[test]
    fn ball_weighted_energy_unit_source() {
        // f = 1 on the unit disk: E = -1/2 (pi/8 + 1/4).
        let c = MeasureConstants::planar();
        let fstar = StepProfile::constant(1.0, PI).unwrap();
        let e = ball_weighted_energy(&fstar, 1.0, &c).unwrap();
        assert!((e + 0.5 * (PI / 8.0 + 0.25)).abs() < 1e-12, "{e}");
    }

    #[test]
    fn weighted_torsion_comparison_unit_weight() {
        let d = GridDomain::unit_square(1.0 / 48.0).unwrap();
        let one = ScalarField::constant(&d, 1.0).unwrap();
        let rec =
            compare_weighted_torsion(&d, 1.0, &one, &MeasureConstants::planar(), TOL).unwrap();
        assert!(rec.holds(), "{rec:?}");
        assert!(rec.margin() > 0.0);
    }

    #[test]
    fn nonlinear_functional_examples() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let one = ScalarField::constant(&d, 1.0).unwrap();
        // p = 2 specializes to the torsion quotient.
        let f2 = nonlinear_functional_eval(&d, &one, 1.0, 2.0).unwrap();
        let t2 = torsion_functional(&d, &one, 1.0).unwrap();
        assert!((f2 - t2).abs() < 1e-10);
        // p = 3 on the constant field: beta |∂Ω|^2 ∫_∂Ω 1 = 64.
        let f3 = nonlinear_functional_eval(&d, &one, 1.0, 3.0).unwrap();
        assert!((f3 - 64.0).abs() < 1e-8, "{f3}");
    }

    #[test]
    fn nonlinear_symmetrization_inequality() {
        let d = GridDomain::unit_square(1.0 / 64.0).unwrap();
        let u = ScalarField::from_fn(&d, |x, _| x).unwrap();
        let ustar = build_ustar(&d, &u, &MeasureConstants::planar()).unwrap();
        for p in [2.0, 3.0] {
            let lhs = nonlinear_functional_eval(&d, &u, 1.0, p).unwrap();
            let rhs = nonlinear_functional_radial(&ustar, 1.0, p).unwrap();
            assert!(rhs <= lhs * (1.0 + 0.05), "p={p}: {rhs} vs {lhs}");
        }
    }
}
