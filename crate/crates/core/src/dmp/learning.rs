use serde::{Deserialize, Serialize};

use super::{default_basis, CanonicalSystem, ForcingTerm, PrimitiveKind};
use crate::error::{check_dim, Error, Result};

/// Sampled demonstration with positions and derivatives for each DOF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoTrajectory {
    times: Vec<f64>,
    y: Vec<Vec<f64>>,
    ydot: Vec<Vec<f64>>,
    yddot: Vec<Vec<f64>>,
}

impl DemoTrajectory {
    /// Outer index is the DOF, inner index the sample.
    pub fn new(
        times: Vec<f64>,
        y: Vec<Vec<f64>>,
        ydot: Vec<Vec<f64>>,
        yddot: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidParameter(
                "demonstration needs at least 2 samples".into(),
            ));
        }
        if y.is_empty() {
            return Err(Error::InvalidParameter(
                "demonstration needs at least one DOF".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "demonstration times must be strictly increasing".into(),
            ));
        }
        check_dim("demo velocity DOFs", y.len(), ydot.len())?;
        check_dim("demo acceleration DOFs", y.len(), yddot.len())?;
        for series in y.iter().chain(&ydot).chain(&yddot) {
            check_dim("demo samples", times.len(), series.len())?;
            if series.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("demonstration samples"));
            }
        }
        Ok(Self {
            times,
            y,
            ydot,
            yddot,
        })
    }

    /// Samples `f(t) -> (y, ẏ, ÿ)` at the given times.
    pub fn sampled<F>(times: Vec<f64>, n_dof: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>),
    {
        let mut y = vec![Vec::with_capacity(times.len()); n_dof];
        let mut ydot = y.clone();
        let mut yddot = y.clone();
        for &t in &times {
            let (p, v, a) = f(t);
            check_dim("sampled demo position", n_dof, p.len())?;
            check_dim("sampled demo velocity", n_dof, v.len())?;
            check_dim("sampled demo acceleration", n_dof, a.len())?;
            for d in 0..n_dof {
                y[d].push(p[d]);
                ydot[d].push(v[d]);
                yddot[d].push(a[d]);
            }
        }
        Self::new(times, y, ydot, yddot)
    }

    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn n_dof(&self) -> usize {
        self.y.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn position(&self, dof: usize) -> &[f64] {
        &self.y[dof]
    }

    pub fn velocity(&self, dof: usize) -> &[f64] {
        &self.ydot[dof]
    }

    pub fn acceleration(&self, dof: usize) -> &[f64] {
        &self.yddot[dof]
    }
}

/// Transformation-system gains and basis layout used for learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningConfig {
    pub alpha_z: f64,
    pub beta_z: f64,
    pub n_basis: usize,
    /// Rhythmic amplitude `r`; ignored for discrete primitives.
    pub amplitude: f64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            alpha_z: 10.0,
            beta_z: 2.5,
            n_basis: 50,
            amplitude: 1.0,
        }
    }
}

/// Learned forcing term for one DOF together with its anchor points.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedPrimitive {
    pub forcing: ForcingTerm,
    pub goal: f64,
    pub y0: f64,
    pub ydot0: f64,
    /// Basis indices whose regression denominator vanished; their weight is zero.
    pub degenerate_weights: Vec<usize>,
}

/// `f_target = τ² ÿ + α_z τ ẏ + α_z β_z (y − g)` at every sample.
pub fn target_forcing(
    y: &[f64],
    ydot: &[f64],
    yddot: &[f64],
    tau: f64,
    alpha_z: f64,
    beta_z: f64,
    goal: f64,
) -> Vec<f64> {
    y.iter()
        .zip(ydot)
        .zip(yddot)
        .map(|((&p, &v), &a)| tau * tau * a + alpha_z * tau * v + alpha_z * beta_z * (p - goal))
        .collect()
}

/// Weighted least-squares weight `aᵀ Φ f / aᵀ Φ a`; `None` when the denominator vanishes.
pub fn regression_weight(a: &[f64], phi: &[f64], f: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for ((&aj, &pj), &fj) in a.iter().zip(phi).zip(f) {
        num += aj * pj * fj;
        den += aj * aj * pj;
    }
    if den.is_finite() && den > 1e-300 {
        Some(num / den)
    } else {
        None
    }
}

/// One-shot batch regression of a forcing term per DOF.
///
/// Discrete: `g` is the last sample and `y0` the first. Rhythmic: `g` is the
/// midpoint of the sample range and the canonical `τ` must be `period / 2π`.
pub fn imitation_learn(
    demo: &DemoTrajectory,
    cs: &CanonicalSystem,
    config: &LearningConfig,
) -> Result<Vec<LearnedPrimitive>> {
    let kind = cs.kind();
    let tau = cs.tau();
    let (centers, widths) = default_basis(kind, config.n_basis, cs.alpha_s())?;
    let phases: Vec<f64> = demo
        .times
        .iter()
        .map(|&t| cs.phase(t - demo.times[0]))
        .collect();
    let probe = ForcingTerm::new(
        kind,
        vec![0.0; centers.len()],
        centers.clone(),
        widths.clone(),
        1.0,
    )?;
    let phi: Vec<Vec<f64>> = (0..probe.n_basis())
        .map(|i| phases.iter().map(|&s| probe.basis(i, s)).collect())
        .collect();

    (0..demo.n_dof())
        .map(|d| {
            let y = &demo.y[d];
            let y0 = y[0];
            let goal = match kind {
                PrimitiveKind::Discrete => *y.last().expect("non-empty"),
                PrimitiveKind::Rhythmic => {
                    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    0.5 * (lo + hi)
                }
            };
            let scale = match kind {
                PrimitiveKind::Discrete => goal - y0,
                PrimitiveKind::Rhythmic => config.amplitude,
            };
            let f_target = target_forcing(
                y,
                &demo.ydot[d],
                &demo.yddot[d],
                tau,
                config.alpha_z,
                config.beta_z,
                goal,
            );
            let a: Vec<f64> = match kind {
                PrimitiveKind::Discrete => phases.iter().map(|&s| s * scale).collect(),
                PrimitiveKind::Rhythmic => vec![scale; phases.len()],
            };
            let mut degenerate = Vec::new();
            let weights = phi
                .iter()
                .enumerate()
                .map(|(i, phi_i)| {
                    regression_weight(&a, phi_i, &f_target).unwrap_or_else(|| {
                        degenerate.push(i);
                        0.0
                    })
                })
                .collect();
            Ok(LearnedPrimitive {
                forcing: ForcingTerm::new(kind, weights, centers.clone(), widths.clone(), scale)?,
                goal,
                y0,
                ydot0: demo.ydot[d][0],
                degenerate_weights: degenerate,
            })
        })
        .collect()
}
