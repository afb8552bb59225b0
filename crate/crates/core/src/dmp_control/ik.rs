use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::DlsPolicy;
use crate::dynamics::{forward_kinematics, jacobian, jacobian_dot, PlanarChain};
use crate::error::{check_dim, Error, Result};

/// Position residual at which iterative inverse kinematics stops.
pub const IK_TOLERANCE: f64 = 1e-10;
/// `|det J|` below which the square Jacobian is treated as singular.
pub const SINGULAR_DET: f64 = 1e-9;

const BOUNDARY_SLACK: f64 = 1e-12;
const NEWTON_ITERATIONS: usize = 200;

/// Sign of the elbow joint for the analytic 2-link solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElbowBranch {
    /// `q2 ≤ 0`.
    Up,
    /// `q2 ≥ 0`.
    Down,
}

/// Joint configuration reaching `p_des`.
///
/// Two links use the closed-form solution on `branch`; other chains run a
/// damped Newton iteration from `seed`.
pub fn ik_position(
    chain: &PlanarChain,
    p_des: &Vector2<f64>,
    seed: Option<&DVector<f64>>,
    branch: ElbowBranch,
) -> Result<DVector<f64>> {
    if !(p_des.x.is_finite() && p_des.y.is_finite()) {
        return Err(Error::NonFinite("IK target"));
    }
    if chain.n_links() == 2 {
        return analytic_two_link(chain, p_des, branch);
    }
    let seed = seed
        .ok_or_else(|| Error::InvalidParameter("iterative IK needs a seed configuration".into()))?;
    newton(chain, p_des, seed)
}

fn analytic_two_link(
    chain: &PlanarChain,
    p: &Vector2<f64>,
    branch: ElbowBranch,
) -> Result<DVector<f64>> {
    let (l1, l2) = (chain.lengths()[0], chain.lengths()[1]);
    let r2 = p.norm_squared();
    let c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !(-1.0 - BOUNDARY_SLACK..=1.0 + BOUNDARY_SLACK).contains(&c2) {
        return Err(Error::OutOfWorkspace { x: p.x, y: p.y });
    }
    let c2 = c2.clamp(-1.0, 1.0);
    let s2 = match branch {
        ElbowBranch::Down => (1.0 - c2 * c2).sqrt(),
        ElbowBranch::Up => -(1.0 - c2 * c2).sqrt(),
    };
    let q2 = s2.atan2(c2);
    let q1 = p.y.atan2(p.x) - (l2 * s2).atan2(l1 + l2 * c2);
    Ok(DVector::from_vec(vec![q1, q2]))
}

fn newton(chain: &PlanarChain, p: &Vector2<f64>, seed: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("IK seed", chain.n_links(), seed.len())?;
    if p.norm() > chain.reach() + BOUNDARY_SLACK {
        return Err(Error::OutOfWorkspace { x: p.x, y: p.y });
    }
    let policy = DlsPolicy::default();
    let mut q = seed.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_ITERATIONS {
        let e = p - forward_kinematics(chain, &q)?;
        residual = e.norm();
        if residual < IK_TOLERANCE {
            return Ok(q);
        }
        let j = jacobian(chain, &q)?;
        let e = DVector::from_column_slice(e.as_slice());
        q += policy.pseudo_inverse(&j) * e;
    }
    Err(Error::IkDiverged { residual })
}

/// `q̇ = J⁻¹ ṗ` and `q̈ = J⁻¹ (p̈ − J̇ q̇)` for a square 2-link Jacobian.
pub fn ik_velocity_accel(
    chain: &PlanarChain,
    q: &DVector<f64>,
    pdot_des: &Vector2<f64>,
    pddot_des: &Vector2<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim("square Jacobian links", 2, chain.n_links())?;
    let j = jacobian(chain, q)?;
    let det = j.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_DET {
        return Err(Error::Singularity { det });
    }
    let inv = j.try_inverse().ok_or(Error::Singularity { det })?;
    let qdot = &inv * DVector::from_column_slice(pdot_des.as_slice());
    let bias = jacobian_dot(chain, q, &qdot)? * &qdot;
    let qddot = inv * (DVector::from_column_slice(pddot_des.as_slice()) - bias);
    Ok((qdot, qddot))
}

/// Joint position, velocity and acceleration realizing one task-space plan sample.
pub fn resolve_task_sample(
    chain: &PlanarChain,
    p: &Vector2<f64>,
    pdot: &Vector2<f64>,
    pddot: &Vector2<f64>,
    branch: ElbowBranch,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let q = ik_position(chain, p, None, branch)?;
    let (qdot, qddot) = ik_velocity_accel(chain, &q, pdot, pddot)?;
    Ok((q, qdot, qddot))
}
