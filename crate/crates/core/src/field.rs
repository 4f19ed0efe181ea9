//! Cell-sampled nonnegative functions on a [`GridDomain`], their discrete
//! gradients and boundary trace integrals.

use crate::grid::{GridDomain, GridError};
use crate::numeric::{csum, CompensatedSum, SplitMix64};
use crate::rearrange::{RearrangeError, WeightedSamples};

/// One nonnegative value per active cell of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    stamp: u64,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(domain: &GridDomain, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != domain.n_cells() {
            return Err(GridError::FieldSize {
                expected: domain.n_cells(),
                found: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(GridError::NegativeFieldValue(i));
            }
        }
        Ok(Self { stamp: domain.stamp(), values })
    }

    /// Samples a function of the cell-center coordinates.
    pub fn from_fn(
        domain: &GridDomain,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let values = domain
            .cells()
            .iter()
            .map(|c| f(c.center[0], c.center[1]))
            .collect();
        Self::from_values(domain, values)
    }

    pub fn constant(domain: &GridDomain, value: f64) -> Result<Self, GridError> {
        Self::from_values(domain, vec![value; domain.n_cells()])
    }

    /// Seeded band-limited nonnegative field: a truncated cosine series over
    /// the domain bounding box, shifted so the minimum over cells is zero.
    pub fn random_smooth(domain: &GridDomain, seed: u64) -> Self {
        Self::random_smooth_with_bound(domain, seed).0
    }

    /// Same as [`ScalarField::random_smooth`] but also returns the analytic
    /// bound on the gradient magnitude of the underlying series.
    pub fn random_smooth_with_bound(domain: &GridDomain, seed: u64) -> (Self, f64) {
        const MODES: usize = 4;
        let mut rng = SplitMix64::new(seed);
        let (lo, hi) = domain.bbox();
        let lx = (hi[0] - lo[0]).max(f64::MIN_POSITIVE);
        let ly = (hi[1] - lo[1]).max(f64::MIN_POSITIVE);

        let mut coeffs = [[0.0f64; MODES + 1]; MODES + 1];
        for (k, row) in coeffs.iter_mut().enumerate() {
            for (l, a) in row.iter_mut().enumerate() {
                *a = rng.range(-1.0, 1.0) / (1.0 + (k * k + l * l) as f64);
            }
        }

        let pi = std::f64::consts::PI;
        let eval = |x: f64, y: f64| {
            let xh = (x - lo[0]) / lx;
            let yh = (y - lo[1]) / ly;
            let mut s = 0.0;
            for (k, row) in coeffs.iter().enumerate() {
                for (l, a) in row.iter().enumerate() {
                    s += a * (pi * k as f64 * xh).cos() * (pi * l as f64 * yh).cos();
                }
            }
            s
        };

        let mut values: Vec<f64> = domain
            .cells()
            .iter()
            .map(|c| eval(c.center[0], c.center[1]))
            .collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        for v in values.iter_mut() {
            *v -= min;
        }

        // |du/dx| <= sum |a_kl| k pi / lx and likewise in y.
        let mut bx = 0.0;
        let mut by = 0.0;
        for (k, row) in coeffs.iter().enumerate() {
            for (l, a) in row.iter().enumerate() {
                bx += a.abs() * pi * k as f64 / lx;
                by += a.abs() * pi * l as f64 / ly;
            }
        }
        let bound = bx.hypot(by);

        (
            Self { stamp: domain.stamp(), values },
            bound,
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_domain(&self, domain: &GridDomain) -> Result<(), GridError> {
        if self.stamp != domain.stamp() || self.values.len() != domain.n_cells() {
            return Err(GridError::FieldDomainMismatch);
        }
        Ok(())
    }

    /// Pointwise scaling by a nonnegative factor.
    pub fn scaled(&self, lambda: f64) -> ScalarField {
        ScalarField {
            stamp: self.stamp,
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }
}

/// Per-cell gradient components by central differences, falling back to
/// one-sided second-order (then first-order) stencils where neighbors are
/// missing. The field is never extended outside the domain.
pub fn gradient_components(
    domain: &GridDomain,
    u: &ScalarField,
) -> Result<(Vec<f64>, Vec<f64>), GridError> {
    u.check_domain(domain)?;
    let h = domain.spacing();
    let v = u.values();
    let axis = |i: usize, dx: i64, dy: i64| -> f64 {
        let minus = domain.neighbor(i, -dx, -dy);
        let plus = domain.neighbor(i, dx, dy);
        match (minus, plus) {
            (Some(m), Some(p)) => (v[p] - v[m]) / (2.0 * h),
            (None, Some(p)) => match domain.neighbor(p, dx, dy) {
                Some(pp) => (-3.0 * v[i] + 4.0 * v[p] - v[pp]) / (2.0 * h),
                None => (v[p] - v[i]) / h,
            },
            (Some(m), None) => match domain.neighbor(m, -dx, -dy) {
                Some(mm) => (3.0 * v[i] - 4.0 * v[m] + v[mm]) / (2.0 * h),
                None => (v[i] - v[m]) / h,
            },
            (None, None) => 0.0,
        }
    };
    let mut gx = Vec::with_capacity(v.len());
    let mut gy = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        gx.push(axis(i, 1, 0));
        gy.push(axis(i, 0, 1));
    }
    Ok((gx, gy))
}

/// Per-cell `|∇u|`.
pub fn gradient_magnitude(domain: &GridDomain, u: &ScalarField) -> Result<ScalarField, GridError> {
    let (gx, gy) = gradient_components(domain, u)?;
    let values = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    ScalarField::from_values(domain, values)
}

/// Max of `|∇u|` over cells; enters the discretization tolerance model.
pub fn gradient_sup(domain: &GridDomain, u: &ScalarField) -> Result<f64, GridError> {
    Ok(gradient_magnitude(domain, u)?.max_value())
}

/// `∫_{∂Ω} u^p dH^{n-1}`: cell values extrapolated linearly to each segment
/// midpoint, raised to `p` and weighted by segment length.
pub fn boundary_trace_integral(
    domain: &GridDomain,
    u: &ScalarField,
    p: f64,
) -> Result<f64, GridError> {
    u.check_domain(domain)?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(GridError::InvalidExponent(p));
    }
    let (gx, gy) = gradient_components(domain, u)?;
    let mut acc = CompensatedSum::new();
    for seg in domain.segments() {
        let c = &domain.cells()[seg.cell];
        let val = u.values()[seg.cell]
            + gx[seg.cell] * (seg.midpoint[0] - c.center[0])
            + gy[seg.cell] * (seg.midpoint[1] - c.center[1]);
        let val = val.max(0.0);
        acc.add(val.powf(p) * seg.length);
    }
    Ok(acc.total())
}

/// `∫_Ω u dx` as the cellwise sum against cell measures.
pub fn integral(domain: &GridDomain, u: &ScalarField) -> Result<f64, GridError> {
    u.check_domain(domain)?;
    Ok(csum(
        u.values()
            .iter()
            .zip(domain.cells())
            .map(|(v, c)| v * c.area),
    ))
}

/// Bridge into the rearrangement world: values with their cell measures.
pub fn field_to_samples(
    domain: &GridDomain,
    u: &ScalarField,
) -> Result<WeightedSamples, RearrangeError> {
    if u.values().len() != domain.n_cells() {
        return Err(RearrangeError::MismatchedStructure);
    }
    WeightedSamples::new(
        u.values().to_vec(),
        domain.cells().iter().map(|c| c.area).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;

    #[test]
    fn gradient_of_linear_field() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let u = ScalarField::from_fn(&d, |x, _| x).unwrap();
        let g = gradient_magnitude(&d, &u).unwrap();
        for (i, v) in g.values().iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-10, "cell {i}: |grad| = {v}");
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let d = GridDomain::disk([0.0, 0.0], 1.0, 1.0 / 32.0).unwrap();
        let u = ScalarField::constant(&d, 3.0).unwrap();
        let g = gradient_magnitude(&d, &u).unwrap();
        assert!(g.values().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn central_difference_exact_on_quadratics() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let u = ScalarField::from_fn(&d, |x, _| x * x).unwrap();
        let (gx, _) = gradient_components(&d, &u).unwrap();
        for (c, g) in d.cells().iter().zip(&gx) {
            assert!(
                (g - 2.0 * c.center[0]).abs() < 1e-9,
                "at x={}: {g}",
                c.center[0]
            );
        }
    }

    #[test]
    fn trace_of_one_is_perimeter() {
        let d = GridDomain::unit_square(1.0 / 64.0).unwrap();
        let u = ScalarField::constant(&d, 1.0).unwrap();
        let t = boundary_trace_integral(&d, &u, 1.0).unwrap();
        assert!((t - d.perimeter()).abs() < 1e-12 * d.perimeter());
    }

    #[test]
    fn trace_of_x_on_unit_square() {
        let d = GridDomain::unit_square(1.0 / 128.0).unwrap();
        let u = ScalarField::from_fn(&d, |x, _| x).unwrap();
        let t = boundary_trace_integral(&d, &u, 1.0).unwrap();
        // Sides: 1/2 + 1/2 + 0 + 1 = 2.
        assert!((t - 2.0).abs() < 0.05, "trace {t}");
        let t2 = boundary_trace_integral(&d, &u, 2.0).unwrap();
        assert!((t2 - 5.0 / 3.0).abs() < 0.02, "p=2 trace {t2}");
    }

    #[test]
    fn trace_scales_with_constant_power() {
        let d = GridDomain::unit_square(1.0 / 64.0).unwrap();
        let c = 2.5;
        let u = ScalarField::constant(&d, c).unwrap();
        let t2 = boundary_trace_integral(&d, &u, 2.0).unwrap();
        assert!((t2 - c * c * d.perimeter()).abs() < 1e-10);
    }

    #[test]
    fn samples_carry_domain_measure() {
        let d = GridDomain::unit_square(1.0 / 64.0).unwrap();
        let u = ScalarField::constant(&d, 1.0).unwrap();
        let s = field_to_samples(&d, &u).unwrap();
        assert!((s.total_measure() - 1.0).abs() < 1e-6);
        assert!((s.integral() - integral(&d, &u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn random_smooth_is_deterministic_and_nonnegative() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        let a = ScalarField::random_smooth(&d, 12345);
        let b = ScalarField::random_smooth(&d, 12345);
        assert_eq!(a, b);
        for seed in 0..100 {
            let f = ScalarField::random_smooth(&d, seed);
            assert!(f.min_value() >= 0.0);
        }
    }

    #[test]
    fn random_smooth_gradient_within_analytic_bound() {
        let d = GridDomain::unit_square(1.0 / 32.0).unwrap();
        for seed in 0..100 {
            let (f, bound) = ScalarField::random_smooth_with_bound(&d, seed);
            let g = gradient_sup(&d, &f).unwrap();
            assert!(g <= bound * (1.0 + 1e-9), "seed {seed}: {g} > {bound}");
        }
    }

    #[test]
    fn trace_rejects_exponents_below_one() {
        let d = GridDomain::unit_square(1.0 / 16.0).unwrap();
        let u = ScalarField::constant(&d, 1.0).unwrap();
        assert!(matches!(
            boundary_trace_integral(&d, &u, 0.5),
            Err(GridError::InvalidExponent(_))
        ));
    }

    #[test]
    fn field_domain_mismatch_detected() {
        let d1 = GridDomain::unit_square(1.0 / 16.0).unwrap();
        let d2 = GridDomain::unit_square(1.0 / 8.0).unwrap();
        let u = ScalarField::constant(&d1, 1.0).unwrap();
        assert!(integral(&d2, &u).is_err());
    }
}
