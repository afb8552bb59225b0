use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::PrimitiveKind;
use crate::error::{Error, Result};

/// Phase variable replacing explicit time.
///
/// Discrete: `τ ṡ = −α_s s`, `s(0) = 1`, so `s(t) = exp(−α_s t / τ)`.
/// Rhythmic: `τ ṡ = 1`, wrapped to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSystem {
    kind: PrimitiveKind,
    tau: f64,
    alpha_s: f64,
}

impl CanonicalSystem {
    pub fn discrete(tau: f64, alpha_s: f64) -> Result<Self> {
        check_tau(tau)?;
        if !(alpha_s.is_finite() && alpha_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha_s must be > 0, got {alpha_s}"
            )));
        }
        Ok(Self {
            kind: PrimitiveKind::Discrete,
            tau,
            alpha_s,
        })
    }

    pub fn rhythmic(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            kind: PrimitiveKind::Rhythmic,
            tau,
            alpha_s: 0.0,
        })
    }

    /// Rhythmic system whose phase completes one cycle per `period` seconds.
    pub fn rhythmic_with_period(period: f64) -> Result<Self> {
        Self::rhythmic(period / TAU)
    }

    pub fn kind(&self) -> PrimitiveKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Zero for rhythmic systems.
    pub fn alpha_s(&self) -> f64 {
        self.alpha_s
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self { tau, ..*self })
    }

    /// Closed-form phase `s(t)`.
    pub fn phase(&self, t: f64) -> f64 {
        match self.kind {
            PrimitiveKind::Discrete => (-self.alpha_s * t / self.tau).exp(),
            PrimitiveKind::Rhythmic => (t / self.tau).rem_euclid(TAU),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "tau must be > 0, got {tau}"
        )))
    }
}
