//! Dimension constants for balls and spheres. Grids are planar but every
//! formula is written for general dimension.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("dimension must be >= 2, got {0}")]
    InvalidDimension(u32),
}

/// Dimension `n` together with `omega_n`, the measure of the unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConstants {
    n: u32,
    omega_n: f64,
}

impl MeasureConstants {
    pub fn new(n: u32) -> Result<Self, MeasureError> {
        if n < 2 {
            return Err(MeasureError::InvalidDimension(n));
        }
        // omega_1 = 2, omega_2 = pi, omega_n = omega_{n-2} * 2 pi / n.
        let mut omega = [2.0, std::f64::consts::PI];
        let mut dim = 2;
        while dim < n {
            dim += 1;
            let next = omega[0] * 2.0 * std::f64::consts::PI / dim as f64;
            omega = [omega[1], next];
        }
        Ok(Self { n, omega_n: omega[1] })
    }

    /// The planar case used by the grid modules.
    pub fn planar() -> Self {
        Self { n: 2, omega_n: std::f64::consts::PI }
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn dim_f(&self) -> f64 {
        self.n as f64
    }

    pub fn unit_ball_measure(&self) -> f64 {
        self.omega_n
    }

    /// Radius of the ball of the given measure.
    pub fn ball_radius(&self, measure: f64) -> f64 {
        (measure / self.omega_n).powf(1.0 / self.n as f64)
    }

    /// Measure of the ball of radius `r`.
    pub fn ball_measure(&self, r: f64) -> f64 {
        self.omega_n * r.powf(self.n as f64)
    }

    /// Surface measure of the sphere of radius `r`: `n omega_n r^{n-1}`.
    pub fn sphere_measure(&self, r: f64) -> f64 {
        self.n as f64 * self.omega_n * r.powf(self.n as f64 - 1.0)
    }

    /// Largest Lorentz exponent `n/(n-1)` covered by the comparison theorems.
    pub fn lorentz_range_limit(&self) -> f64 {
        self.n as f64 / (self.n as f64 - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_measures_match_closed_forms() {
        assert_eq!(MeasureConstants::new(2).unwrap().unit_ball_measure(), PI);
        let w3 = MeasureConstants::new(3).unwrap().unit_ball_measure();
        assert!((w3 - 4.0 * PI / 3.0).abs() < 1e-14);
        let w4 = MeasureConstants::new(4).unwrap().unit_ball_measure();
        assert!((w4 - PI * PI / 2.0).abs() < 1e-14);
        let w5 = MeasureConstants::new(5).unwrap().unit_ball_measure();
        assert!((w5 - 8.0 * PI * PI / 15.0).abs() < 1e-13);
    }

    #[test]
    fn schwarz_radius_formulas() {
        let c = MeasureConstants::planar();
        assert!((c.ball_radius(PI) - 1.0).abs() < 1e-15);
        assert!((c.sphere_measure(1.0) - 2.0 * PI).abs() < 1e-15);
        assert!((c.ball_radius(1.0) - 0.5641895835477563).abs() < 1e-12);
    }

    #[test]
    fn low_dimension_rejected() {
        assert!(MeasureConstants::new(1).is_err());
    }
}
