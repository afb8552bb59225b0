use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::DlsPolicy;
use crate::dynamics::{
    coriolis_matrix, forward_kinematics, jacobian, jacobian_dot, mass_matrix, PlanarChain,
    RobotState,
};
use crate::error::{check_dim, Result};
use crate::linalg::{row_major, validate_gain};

/// `τ = M(q) q̈ + C(q, q̇) q̇` along the desired motion.
pub fn inverse_dynamics_torque(
    chain: &PlanarChain,
    q_des: &DVector<f64>,
    qdot_des: &DVector<f64>,
    qddot_des: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim("desired acceleration", chain.n_links(), qddot_des.len())?;
    let m = mass_matrix(chain, q_des)?;
    let c = coriolis_matrix(chain, q_des, qdot_des)?;
    Ok(m * qddot_des + c * qdot_des)
}

/// Sampled joint-space plan.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseDynamicsPlan {
    pub times: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub qdot: Vec<DVector<f64>>,
    pub qddot: Vec<DVector<f64>>,
}

impl InverseDynamicsPlan {
    pub fn new(
        times: Vec<f64>,
        q: Vec<DVector<f64>>,
        qdot: Vec<DVector<f64>>,
        qddot: Vec<DVector<f64>>,
    ) -> Result<Self> {
        check_dim("plan positions", times.len(), q.len())?;
        check_dim("plan velocities", times.len(), qdot.len())?;
        check_dim("plan accelerations", times.len(), qddot.len())?;
        if let Some(first) = q.first() {
            let n = first.len();
            for v in q.iter().chain(&qdot).chain(&qddot) {
                check_dim("plan dimension", n, v.len())?;
            }
        }
        Ok(Self {
            times,
            q,
            qdot,
            qddot,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Feedforward torque at every sample.
    pub fn feedforward(&self, chain: &PlanarChain) -> Result<Vec<DVector<f64>>> {
        (0..self.len())
            .map(|k| inverse_dynamics_torque(chain, &self.q[k], &self.qdot[k], &self.qddot[k]))
            .collect()
    }
}

/// Joint-space PD gains `K_q`, `B_q`, both symmetric positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    #[serde(rename = "kq_nm_per_rad", with = "row_major")]
    pub kq: DMatrix<f64>,
    #[serde(rename = "bq_nms_per_rad", with = "row_major")]
    pub bq: DMatrix<f64>,
}

impl PdGains {
    pub fn new(kq: DMatrix<f64>, bq: DMatrix<f64>) -> Result<Self> {
        let gains = Self { kq, bq };
        gains.validate()?;
        Ok(gains)
    }

    pub fn diagonal(n: usize, k: f64, b: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * k, DMatrix::identity(n, n) * b)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.kq.nrows();
        validate_gain("Kq", &self.kq, n, true)?;
        validate_gain("Bq", &self.bq, n, true)
    }
}

/// `τ_fb = K_q (q_des − q) + B_q (q̇_des − q̇)`.
pub fn pd_feedback(
    gains: &PdGains,
    q_des: &DVector<f64>,
    qdot_des: &DVector<f64>,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = gains.kq.nrows();
    for (name, v) in [
        ("q_des", q_des),
        ("qdot_des", qdot_des),
        ("q", q),
        ("qdot", qdot),
    ] {
        check_dim(name, n, v.len())?;
    }
    Ok(&gains.kq * (q_des - q) + &gains.bq * (qdot_des - qdot))
}

/// Task-space `Λ₁` and joint-space `Λ₂` of the sliding-mode law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidingModeGains {
    #[serde(rename = "lambda1_per_s", with = "row_major")]
    pub lambda1: DMatrix<f64>,
    #[serde(rename = "lambda2_nms_per_rad", with = "row_major")]
    pub lambda2: DMatrix<f64>,
}

impl SlidingModeGains {
    pub fn new(lambda1: DMatrix<f64>, lambda2: DMatrix<f64>) -> Result<Self> {
        let gains = Self { lambda1, lambda2 };
        gains.validate()?;
        Ok(gains)
    }

    pub fn diagonal(n: usize, l1: f64, l2: f64) -> Result<Self> {
        Self::new(DMatrix::identity(2, 2) * l1, DMatrix::identity(n, n) * l2)
    }

    pub fn validate(&self) -> Result<()> {
        validate_gain("Lambda1", &self.lambda1, 2, true)?;
        let n = self.lambda2.nrows();
        validate_gain("Lambda2", &self.lambda2, n, true)
    }
}

/// Velocity-based sliding-mode torque for a possibly redundant chain.
///
/// `ṗ_r = ṗ_des + Λ₁ (p_des − p)`, `q̇_r = J⁺ ṗ_r`,
/// `p̈_r = p̈_des + Λ₁ (ṗ_des − ṗ)`, `q̈_r = J⁺ (p̈_r − J̇ q̇)`,
/// `τ = M q̈_r + C q̇_r − Λ₂ (q̇ − q̇_r)`.
pub fn sliding_mode_torque(
    chain: &PlanarChain,
    gains: &SlidingModeGains,
    state: &RobotState,
    p_des: &Vector2<f64>,
    pdot_des: &Vector2<f64>,
    pddot_des: &Vector2<f64>,
    policy: &DlsPolicy,
) -> Result<DVector<f64>> {
    state.check_for(chain)?;
    check_dim("Lambda2", chain.n_links(), gains.lambda2.nrows())?;
    let (q, qdot) = (&state.q, &state.qdot);
    let j = jacobian(chain, q)?;
    let pinv = policy.pseudo_inverse(&j);
    let p = forward_kinematics(chain, q)?;
    let pdot = &j * qdot;
    let l1 = &gains.lambda1;
    let col = |v: Vector2<f64>| DVector::from_column_slice(v.as_slice());
    let pdot_r = col(*pdot_des) + l1 * col(p_des - p);
    let qdot_r = &pinv * pdot_r;
    let pddot_r = col(*pddot_des) + l1 * (col(*pdot_des) - pdot);
    let qddot_r = &pinv * (pddot_r - jacobian_dot(chain, q, qdot)? * qdot);
    let m = mass_matrix(chain, q)?;
    let c = coriolis_matrix(chain, q, qdot)?;
    Ok(m * qddot_r + c * &qdot_r - &gains.lambda2 * (qdot - qdot_r))
}
