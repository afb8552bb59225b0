use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `τ ẏ = z`, `τ ż = α_z (β_z (g − y) − z) + f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformationSystem {
    pub alpha_z: f64,
    pub beta_z: f64,
    pub tau: f64,
    pub goal: f64,
    pub y: f64,
    pub z: f64,
}

impl TransformationSystem {
    pub fn new(alpha_z: f64, beta_z: f64, tau: f64, goal: f64, y: f64, z: f64) -> Result<Self> {
        for (name, v) in [("alpha_z", alpha_z), ("beta_z", beta_z), ("tau", tau)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if !(goal.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("transformation system state"));
        }
        Ok(Self {
            alpha_z,
            beta_z,
            tau,
            goal,
            y,
            z,
        })
    }

    /// Critically damped system (`β_z = α_z / 4`) at rest at `y`.
    pub fn critically_damped(alpha_z: f64, tau: f64, goal: f64, y: f64) -> Result<Self> {
        Self::new(alpha_z, alpha_z / 4.0, tau, goal, y, 0.0)
    }

    /// Right-hand side `τ ż` for a total input `f`.
    pub fn rhs(&self, f: f64) -> f64 {
        self.alpha_z * (self.beta_z * (self.goal - self.y) - self.z) + f
    }

    pub fn velocity(&self) -> f64 {
        self.z / self.tau
    }

    pub fn acceleration(&self, f: f64) -> f64 {
        self.rhs(f) / (self.tau * self.tau)
    }

    /// Explicit Euler step; returns the new `(y, z)`.
    pub fn step(&mut self, f: f64, dt: f64) -> Result<(f64, f64)> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if !f.is_finite() {
            return Err(Error::NonFinite("forcing input"));
        }
        let zdot = self.rhs(f) / self.tau;
        let ydot = self.z / self.tau;
        self.y += ydot * dt;
        self.z += zdot * dt;
        Ok((self.y, self.z))
    }

    /// Eigenvalues of the unforced system in `(y, z)`.
    pub fn unforced_eigenvalues(&self) -> [Complex<f64>; 2] {
        let a = self.alpha_z;
        let disc = Complex::new(a * a - 4.0 * a * self.beta_z, 0.0).sqrt();
        let two_tau = 2.0 * self.tau;
        [(-a + disc) / two_tau, (-a - disc) / two_tau]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_is_fixed() {
        let mut ts = TransformationSystem::critically_damped(10.0, 1.0, 0.7, 0.7).unwrap();
        for _ in 0..100 {
            ts.step(0.0, 1e-3).unwrap();
        }
        assert_eq!((ts.y, ts.z), (0.7, 0.0));
    }

    #[test]
    fn critically_damped_eigenvalues() {
        let ts = TransformationSystem::new(10.0, 2.5, 1.0, 0.0, 1.0, 0.0).unwrap();
        for ev in ts.unforced_eigenvalues() {
            assert!((ev.re + 5.0).abs() < 1e-12 && ev.im.abs() < 1e-12);
        }
    }

    #[test]
    fn unforced_response_has_no_overshoot() {
        let mut ts = TransformationSystem::critically_damped(10.0, 1.0, 1.0, 0.0).unwrap();
        let dt = 1e-4;
        let mut prev = ts.y;
        for k in 1..=30_000 {
            ts.step(0.0, dt).unwrap();
            assert!(ts.y >= prev - 1e-15);
            assert!(ts.y <= 1.0 + 1e-6);
            prev = ts.y;
            if k % 5000 == 0 {
                // closed form of the repeated-root response
                let t = k as f64 * dt;
                let exact = 1.0 - (1.0 + 5.0 * t) * (-5.0 * t).exp();
                assert!((ts.y - exact).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut ts = TransformationSystem::critically_damped(10.0, 1.0, 1.0, 0.0).unwrap();
        assert!(ts.step(f64::NAN, 1e-3).is_err());
        assert!(ts.step(0.0, 0.0).is_err());
        assert!(TransformationSystem::new(-1.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }
}
