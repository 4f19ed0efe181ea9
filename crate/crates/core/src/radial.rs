//! Radially decreasing functions on a ball, stored piecewise with closed-form
//! integrals.
//!
//! Every radial object in this crate — the comparison function built from a
//! gradient rearrangement, the exact Robin torsion function on the ball, the
//! radial solutions of the gradient-prescribed Dirichlet problem — is a
//! piecewise quadratic in `r`. Volume integrals, Lorentz `L^{p,1}` norms and
//! weighted profile integrals are all evaluated exactly per piece; no
//! quadrature appears anywhere.

use thiserror::Error;

use crate::measure::MeasureConstants;
use crate::numeric::{power_integral, CompensatedSum};
use crate::rearrange::StepProfile;

#[derive(Debug, Error, PartialEq)]
pub enum RadialError {
    #[error("gradient profile must be nondecreasing for a radial layout")]
    GradientNotIncreasing,
    #[error("radial profile must be nonincreasing")]
    NotNonincreasing,
    #[error("boundary value must be nonnegative and finite")]
    InvalidBoundaryValue,
    #[error("outer radius must be positive")]
    InvalidRadius,
}

/// One piece `value(r) = a + b r + c r^2` on `[r_lo, r_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPiece {
    pub r_lo: f64,
    pub r_hi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RadialPiece {
    fn value_at(&self, r: f64) -> f64 {
        self.a + self.b * r + self.c * r * r
    }

    fn slope_at(&self, r: f64) -> f64 {
        self.b + 2.0 * self.c * r
    }
}

/// A nonincreasing radial function on the ball of radius `r_max` in
/// dimension `n`, with an optional gradient profile in the measure variable.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    constants: MeasureConstants,
    r_max: f64,
    boundary_value: f64,
    pieces: Vec<RadialPiece>,
    gradient_profile: Option<StepProfile>,
}

impl RadialFunction {
    /// Builds the radial function whose gradient magnitude, laid out over the
    /// ball in the measure variable `s = omega_n r^n`, is the nondecreasing
    /// step profile `grad`:
    ///
    /// `value(r) = boundary_value + ∫_r^R grad(omega_n t^n) dt`.
    ///
    /// Each step of `grad` contributes a linear piece, so the construction is
    /// exact.
    pub fn from_increasing_gradient_profile(
        grad: &StepProfile,
        constants: MeasureConstants,
        boundary_value: f64,
    ) -> Result<Self, RadialError> {
        if !grad.values_nondecreasing() {
            return Err(RadialError::GradientNotIncreasing);
        }
        if !(boundary_value.is_finite() && boundary_value >= 0.0) {
            return Err(RadialError::InvalidBoundaryValue);
        }
        let total = grad.total_measure();
        if !(total.is_finite() && total > 0.0) {
            return Err(RadialError::InvalidRadius);
        }
        let r_max = constants.ball_radius(total);

        // Radii of the profile breakpoints; force the outermost to r_max.
        let breaks = grad.breakpoints();
        let mut radii: Vec<f64> = breaks.iter().map(|&s| constants.ball_radius(s)).collect();
        if let Some(last) = radii.last_mut() {
            *last = r_max;
        }

        // Integrate inward: value at node k from value at node k+1.
        let steps = grad.steps();
        let mut node_values = vec![0.0; radii.len()];
        node_values[radii.len() - 1] = boundary_value;
        for k in (0..steps.len()).rev() {
            node_values[k] = node_values[k + 1] + steps[k].value * (radii[k + 1] - radii[k]);
        }

        let mut pieces = Vec::with_capacity(steps.len());
        for k in 0..steps.len() {
            let g = steps[k].value;
            // value(r) = node_values[k+1] + g * (radii[k+1] - r)
            pieces.push(RadialPiece {
                r_lo: radii[k],
                r_hi: radii[k + 1],
                a: node_values[k + 1] + g * radii[k + 1],
                b: -g,
                c: 0.0,
            });
        }

        Ok(Self {
            constants,
            r_max,
            boundary_value,
            pieces,
            gradient_profile: Some(grad.clone()),
        })
    }

    /// A single quadratic piece on `[0, R]`; used for the exact ball torsion
    /// function.
    pub fn single_quadratic(
        constants: MeasureConstants,
        r_max: f64,
        a: f64,
        b: f64,
        c: f64,
    ) -> Result<Self, RadialError> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(RadialError::InvalidRadius);
        }
        let piece = RadialPiece { r_lo: 0.0, r_hi: r_max, a, b, c };
        let boundary_value = piece.value_at(r_max);
        if !(boundary_value.is_finite() && boundary_value >= 0.0) {
            return Err(RadialError::InvalidBoundaryValue);
        }
        if piece.slope_at(0.0) > 1e-12 || piece.slope_at(r_max) > 1e-12 * (1.0 + a.abs()) {
            return Err(RadialError::NotNonincreasing);
        }
        Ok(Self {
            constants,
            r_max,
            boundary_value,
            pieces: vec![piece],
            gradient_profile: None,
        })
    }

    pub fn constants(&self) -> &MeasureConstants {
        &self.constants
    }

    pub fn dim(&self) -> u32 {
        self.constants.dim()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn boundary_value(&self) -> f64 {
        self.boundary_value
    }

    /// Measure of the supporting ball.
    pub fn total_measure(&self) -> f64 {
        self.constants.ball_measure(self.r_max)
    }

    /// Profile of the gradient magnitude in the measure variable, when the
    /// function was built from one.
    pub fn gradient_profile(&self) -> Option<&StepProfile> {
        self.gradient_profile.as_ref()
    }

    pub fn pieces(&self) -> &[RadialPiece] {
        &self.pieces
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.r_max);
        for p in &self.pieces {
            if r <= p.r_hi {
                return p.value_at(r);
            }
        }
        self.boundary_value
    }

    pub fn max_value(&self) -> f64 {
        self.value_at(0.0)
    }

    /// Value as a function of the measure variable, `s = omega_n r^n`.
    pub fn value_at_measure(&self, s: f64) -> f64 {
        self.value_at(self.constants.ball_radius(s.max(0.0)))
    }

    pub fn is_nonincreasing(&self) -> bool {
        let scale = 1.0 + self.max_value().abs();
        self.pieces.iter().all(|p| {
            p.slope_at(p.r_lo) <= 1e-9 * scale && p.slope_at(p.r_hi) <= 1e-9 * scale
        })
    }

    /// `∫ value dV` over the annulus `r1 <= r <= r2`, exact per piece.
    pub fn volume_integral_between(&self, r1: f64, r2: f64) -> f64 {
        let nf = self.constants.dim_f();
        let omega = self.constants.unit_ball_measure();
        let lo = r1.clamp(0.0, self.r_max);
        let hi = r2.clamp(0.0, self.r_max);
        let mut acc = CompensatedSum::new();
        for p in &self.pieces {
            let a = p.r_lo.max(lo);
            let b = p.r_hi.min(hi);
            if b <= a {
                continue;
            }
            // ∫ (a0 + b0 r + c0 r^2) n omega r^{n-1} dr
            let term = nf * omega
                * (p.a * power_integral(a, b, nf - 1.0)
                    + p.b * power_integral(a, b, nf)
                    + p.c * power_integral(a, b, nf + 1.0));
            acc.add(term);
        }
        acc.total()
    }

    /// `||v||_{L^1}` over the whole ball.
    pub fn l1_norm(&self) -> f64 {
        self.volume_integral_between(0.0, self.r_max)
    }

    /// Lorentz `L^{p,1}` norm: `∫_0^{|B|} s^{1/p - 1} v(s) ds` in the measure
    /// variable, which is the decreasing rearrangement of a radially
    /// decreasing function. Closed form per piece.
    pub fn lorentz_p1_norm(&self, p: f64) -> f64 {
        let nf = self.constants.dim_f();
        let omega = self.constants.unit_ball_measure();
        let kappa = 1.0 / p - 1.0;
        let mut acc = CompensatedSum::new();
        for piece in &self.pieces {
            let s_lo = self.constants.ball_measure(piece.r_lo);
            let s_hi = self.constants.ball_measure(piece.r_hi);
            if s_hi <= s_lo {
                continue;
            }
            // v(s) = a + b (s/omega)^{1/n} + c (s/omega)^{2/n}
            if piece.a != 0.0 {
                acc.add(piece.a * power_integral(s_lo, s_hi, kappa));
            }
            if piece.b != 0.0 {
                acc.add(
                    piece.b * omega.powf(-1.0 / nf)
                        * power_integral(s_lo, s_hi, kappa + 1.0 / nf),
                );
            }
            if piece.c != 0.0 {
                acc.add(
                    piece.c * omega.powf(-2.0 / nf)
                        * power_integral(s_lo, s_hi, kappa + 2.0 / nf),
                );
            }
        }
        acc.total()
    }

    /// `∫_0^{|B|} w(s) v(s) ds` against a step profile `w` in the measure
    /// variable. For two radially decreasing functions this equals the
    /// spatial integral of their product over the ball. Merge walk over the
    /// two partitions, closed form on each overlap.
    pub fn weighted_profile_integral(&self, weight: &StepProfile) -> f64 {
        let nf = self.constants.dim_f();
        let omega = self.constants.unit_ball_measure();
        let om1 = omega.powf(-1.0 / nf);
        let om2 = omega.powf(-2.0 / nf);
        let end = weight.total_measure().min(self.total_measure());

        let piece_hi: Vec<f64> = self
            .pieces
            .iter()
            .map(|p| self.constants.ball_measure(p.r_hi))
            .collect();
        let wsteps = weight.steps();
        let wbreaks = weight.breakpoints();

        let mut acc = CompensatedSum::new();
        let mut s = 0.0;
        let mut wi = 0;
        let mut pi = 0;
        while s < end && wi < wsteps.len() && pi < self.pieces.len() {
            let hi = wbreaks[wi + 1].min(piece_hi[pi]).min(end);
            if hi > s && wsteps[wi].value != 0.0 {
                let piece = &self.pieces[pi];
                let mut inner = piece.a * (hi - s);
                if piece.b != 0.0 {
                    inner += piece.b * om1 * power_integral(s, hi, 1.0 / nf);
                }
                if piece.c != 0.0 {
                    inner += piece.c * om2 * power_integral(s, hi, 2.0 / nf);
                }
                acc.add(wsteps[wi].value * inner);
            }
            if wbreaks[wi + 1] <= hi {
                wi += 1;
            }
            if piece_hi[pi] <= hi {
                pi += 1;
            }
            s = hi;
        }
        acc.total()
    }

    /// Nodes `(s, value)` at piece boundaries, for profile dumps.
    pub fn measure_profile_nodes(&self) -> Vec<(f64, f64)> {
        let mut nodes = Vec::with_capacity(self.pieces.len() + 1);
        if let Some(first) = self.pieces.first() {
            nodes.push((
                self.constants.ball_measure(first.r_lo),
                first.value_at(first.r_lo),
            ));
        }
        for p in &self.pieces {
            nodes.push((self.constants.ball_measure(p.r_hi), p.value_at(p.r_hi)));
        }
        nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::Monotonicity;
    use std::f64::consts::PI;

    fn cone() -> RadialFunction {
        // Gradient identically 1 on a ball of measure pi: the cone 1 - r.
        let grad = StepProfile::new(vec![(1.0, PI)], Monotonicity::Nondecreasing).unwrap();
        RadialFunction::from_increasing_gradient_profile(&grad, MeasureConstants::planar(), 0.0)
            .unwrap()
    }

    #[test]
    fn cone_construction() {
        let v = cone();
        assert!((v.r_max() - 1.0).abs() < 1e-14);
        assert!((v.value_at(0.0) - 1.0).abs() < 1e-14);
        assert!((v.value_at(0.25) - 0.75).abs() < 1e-14);
        assert!((v.value_at(1.0)).abs() < 1e-14);
        assert!(v.is_nonincreasing());
    }

    #[test]
    fn cone_volume_integral() {
        // ∫_{B_1} (1 - |x|) dx = pi/3.
        let v = cone();
        assert!((v.l1_norm() - PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn cone_lorentz_p1_matches_l1_at_p1() {
        let v = cone();
        assert!((v.lorentz_p1_norm(1.0) - PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn two_step_gradient_profile() {
        // grad = 0 on [0, pi/4), 2 on [pi/4, pi): plateau then slope 2.
        let grad = StepProfile::new(
            vec![(0.0, PI / 4.0), (2.0, 3.0 * PI / 4.0)],
            Monotonicity::Nondecreasing,
        )
        .unwrap();
        let v = RadialFunction::from_increasing_gradient_profile(
            &grad,
            MeasureConstants::planar(),
            0.5,
        )
        .unwrap();
        // Plateau radius 1/2, outer radius 1.
        assert!((v.value_at(1.0) - 0.5).abs() < 1e-14);
        let expect_top = 0.5 + 2.0 * (1.0 - 0.5);
        assert!((v.value_at(0.0) - expect_top).abs() < 1e-14);
        assert!((v.value_at(0.25) - expect_top).abs() < 1e-14); // flat inside plateau
        assert!((v.value_at(0.75) - (0.5 + 2.0 * 0.25)).abs() < 1e-14);
        // Weighted integral against the constant-one profile equals l1 in s:
        let one = StepProfile::constant(1.0, PI).unwrap();
        let via_weight = v.weighted_profile_integral(&one);
        assert!((via_weight - v.l1_norm()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_piece_integrals() {
        // z(r) = (1 - r^2)/4 + 1/(4 pi) on the unit disk.
        let c = MeasureConstants::planar();
        let z = RadialFunction::single_quadratic(
            c,
            1.0,
            0.25 + 0.25 / PI,
            0.0,
            -0.25,
        )
        .unwrap();
        assert!((z.value_at(1.0) - 0.25 / PI).abs() < 1e-14);
        let expect = PI / 8.0 + 0.25;
        assert!((z.l1_norm() - expect).abs() < 1e-13);
    }

    #[test]
    fn weighted_profile_integral_matches_spatial_quadrature() {
        // For a radially decreasing v and a radially decreasing weight laid
        // out from its profile, the spatial integral over the ball equals
        // the product integral of the measure-variable profiles. The oracle
        // is a midpoint quadrature in r.
        use crate::numeric::SplitMix64;
        let c = MeasureConstants::planar();
        let mut rng = SplitMix64::new(0xD1CE);
        for case in 0..10 {
            let k = rng.range_usize(1, 5);
            let mut grads: Vec<f64> = (0..k).map(|_| rng.range(0.0, 3.0)).collect();
            grads.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let pairs: Vec<(f64, f64)> =
                grads.into_iter().map(|g| (g, rng.range(0.2, 1.5))).collect();
            let grad = StepProfile::new(pairs, Monotonicity::Nondecreasing).unwrap();
            let v = RadialFunction::from_increasing_gradient_profile(
                &grad,
                c,
                rng.range(0.0, 0.5),
            )
            .unwrap();

            let total = grad.total_measure();
            let m = rng.range_usize(1, 5);
            let mut wvals: Vec<f64> = (0..m).map(|_| rng.range(0.1, 2.0)).collect();
            wvals.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let lens: Vec<f64> = (0..m).map(|_| rng.range(0.2, 1.0)).collect();
            let scale = total / lens.iter().sum::<f64>();
            let wpairs: Vec<(f64, f64)> = wvals
                .into_iter()
                .zip(lens)
                .map(|(v, l)| (v, l * scale))
                .collect();
            let weight = StepProfile::new(wpairs, Monotonicity::Nonincreasing).unwrap();

            let exact = v.weighted_profile_integral(&weight);
            let n = 400_000;
            let dr = v.r_max() / n as f64;
            let mut quad = 0.0;
            for i in 0..n {
                let r = (i as f64 + 0.5) * dr;
                let s = c.ball_measure(r);
                quad += weight.value_at(s) * v.value_at(r) * 2.0 * PI * r * dr;
            }
            assert!(
                (exact - quad).abs() <= 1e-4 * quad.abs().max(1e-6),
                "case {case}: {exact} vs quadrature {quad}"
            );
        }
    }

    #[test]
    fn increasing_gradient_required() {
        let dec = StepProfile::new(vec![(2.0, 1.0), (1.0, 1.0)], Monotonicity::Nonincreasing)
            .unwrap();
        assert_eq!(
            RadialFunction::from_increasing_gradient_profile(
                &dec,
                MeasureConstants::planar(),
                0.0
            )
            .unwrap_err(),
            RadialError::GradientNotIncreasing
        );
    }
}
