use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::PrimitiveKind;
use crate::error::{check_dim, Error, Result};

/// Normalized weighted sum of basis functions.
///
/// Discrete: `f(s) = Σ w_i φ_i(s) / Σ φ_i(s) · s · scale` with Gaussian
/// `φ_i = exp(−h_i (s − c_i)²)` and `scale = g − y0`.
/// Rhythmic: `f(s) = Σ w_i φ_i(s) / Σ φ_i(s) · scale` with von Mises
/// `φ_i = exp(h_i (cos(s − c_i) − 1))` and `scale = r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    kind: PrimitiveKind,
    weights: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
    scale: f64,
}

/// Forcing value plus a flag set when the basis normalization degenerated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingEval {
    pub value: f64,
    pub degenerate: bool,
}

/// Default basis layout.
///
/// Discrete: `c_i = exp(−α_s (i−1)/(N−1))`, `h_i = 1/(c_{i+1} − c_i)²`, `h_N = h_{N−1}`.
/// Rhythmic: `c_i = 2π (i−1)/N`, `h_i = N`.
pub fn default_basis(kind: PrimitiveKind, n: usize, alpha_s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one basis function".into(),
        ));
    }
    match kind {
        PrimitiveKind::Discrete => {
            if n == 1 {
                return Ok((vec![1.0], vec![1.0]));
            }
            let centers: Vec<f64> = (0..n)
                .map(|i| (-alpha_s * i as f64 / (n - 1) as f64).exp())
                .collect();
            let mut widths: Vec<f64> = centers
                .windows(2)
                .map(|w| 1.0 / (w[1] - w[0]).powi(2))
                .collect();
            widths.push(widths[n - 2]);
            Ok((centers, widths))
        }
        PrimitiveKind::Rhythmic => {
            let centers = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
            Ok((centers, vec![n as f64; n]))
        }
    }
}

impl ForcingTerm {
    pub fn new(
        kind: PrimitiveKind,
        weights: Vec<f64>,
        centers: Vec<f64>,
        widths: Vec<f64>,
        scale: f64,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidParameter("forcing term needs N >= 1".into()));
        }
        check_dim("forcing centers", n, centers.len())?;
        check_dim("forcing widths", n, widths.len())?;
        if widths.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidParameter("basis widths must be > 0".into()));
        }
        if !(scale.is_finite() && weights.iter().chain(&centers).all(|v| v.is_finite())) {
            return Err(Error::InvalidParameter(
                "forcing term has non-finite parameters".into(),
            ));
        }
        Ok(Self {
            kind,
            weights,
            centers,
            widths,
            scale,
        })
    }

    /// Zero-weight term on the default basis.
    pub fn zeros(kind: PrimitiveKind, n: usize, alpha_s: f64, scale: f64) -> Result<Self> {
        let (centers, widths) = default_basis(kind, n, alpha_s)?;
        Self::new(kind, vec![0.0; n], centers, widths, scale)
    }

    pub fn kind(&self) -> PrimitiveKind {
        self.kind
    }

    pub fn n_basis(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        Self {
            scale,
            ..self.clone()
        }
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(
            self.kind,
            weights,
            self.centers.clone(),
            self.widths.clone(),
            self.scale,
        )
    }

    fn exponent(&self, i: usize, s: f64) -> f64 {
        let (c, h) = (self.centers[i], self.widths[i]);
        match self.kind {
            PrimitiveKind::Discrete => -h * (s - c).powi(2),
            PrimitiveKind::Rhythmic => h * ((s - c).cos() - 1.0),
        }
    }

    /// `φ_i(s)` for the zero-based basis index `i`.
    pub fn basis(&self, i: usize, s: f64) -> f64 {
        self.exponent(i, s).exp()
    }

    /// Evaluates `f(s)`.
    ///
    /// The normalized average is formed with all exponents shifted by their
    /// maximum, so the normalizer is at least one for any finite phase and far
    /// tails of narrow Gaussians do not underflow to `0/0`.
    pub fn eval(&self, s: f64) -> ForcingEval {
        let exps: Vec<f64> = (0..self.n_basis()).map(|i| self.exponent(i, s)).collect();
        let peak = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (w, e) in self.weights.iter().zip(&exps) {
            let phi = (e - peak).exp();
            num += w * phi;
            den += phi;
        }
        if !(peak.is_finite() && den.is_finite() && den > 1e-300) {
            return ForcingEval {
                value: 0.0,
                degenerate: true,
            };
        }
        let average = num / den;
        let value = match self.kind {
            PrimitiveKind::Discrete => average * s * self.scale,
            PrimitiveKind::Rhythmic => average * self.scale,
        };
        ForcingEval {
            value,
            degenerate: false,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).value
    }
}
