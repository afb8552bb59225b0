use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::conditioning;

/// Damped least-squares inverse `Jᵀ (J Jᵀ + λ² I)⁻¹`.
///
/// Evaluated through the SVD as `V diag(σ / (σ² + λ²)) Uᵀ`, which also gives
/// the Moore-Penrose inverse for `λ = 0` when `J` is rank deficient.
pub fn dls_pinv(j: &DMatrix<f64>, damping: f64) -> DMatrix<f64> {
    let svd = j.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V");
    let lambda2 = damping * damping;
    let cutoff = f64::EPSILON * svd.singular_values.max();
    let filtered = svd.singular_values.map(|s| {
        if lambda2 > 0.0 {
            s / (s * s + lambda2)
        } else if s > cutoff {
            1.0 / s
        } else {
            0.0
        }
    });
    vt.transpose() * DMatrix::from_diagonal(&filtered) * u.transpose()
}

/// Damping applied only when `σ_min / σ_max` falls below `activation_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlsPolicy {
    pub damping: f64,
    pub activation_ratio: f64,
}

impl Default for DlsPolicy {
    fn default() -> Self {
        Self {
            damping: 0.01,
            activation_ratio: 0.05,
        }
    }
}

impl DlsPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "DLS damping must be >= 0, got {}",
                self.damping
            )));
        }
        if !(self.activation_ratio.is_finite() && (0.0..=1.0).contains(&self.activation_ratio)) {
            return Err(Error::InvalidParameter(
                "DLS activation ratio must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn is_active(&self, j: &DMatrix<f64>) -> bool {
        conditioning(j) < self.activation_ratio
    }

    pub fn pseudo_inverse(&self, j: &DMatrix<f64>) -> DMatrix<f64> {
        let damping = if self.is_active(j) { self.damping } else { 0.0 };
        dls_pinv(j, damping)
    }
}
