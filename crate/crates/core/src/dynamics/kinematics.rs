use nalgebra::{DMatrix, DVector, Vector2};

use super::chain::PlanarChain;
use crate::error::{check_dim, Result};

/// Absolute link angles `θ_i = Σ_{j≤i} q_j`.
pub fn absolute_angles(q: &DVector<f64>) -> Vec<f64> {
    q.iter()
        .scan(0.0, |acc, &qi| {
            *acc += qi;
            Some(*acc)
        })
        .collect()
}

// A point fixed on the chain is `x = Σ_l a_l u(θ_l)` with `u(θ) = [cos θ, sin θ]`.
// `arms` holds the `a_l`; the end effector uses the link lengths, the center of
// mass of link i uses the lengths up to i-1 then the com offset of link i.

pub(crate) fn end_effector_arms(chain: &PlanarChain) -> Vec<f64> {
    chain.lengths().to_vec()
}

pub(crate) fn com_arms(chain: &PlanarChain, link: usize) -> Vec<f64> {
    (0..chain.n_links())
        .map(|l| match l.cmp(&link) {
            std::cmp::Ordering::Less => chain.lengths()[l],
            std::cmp::Ordering::Equal => chain.com_offsets()[l],
            std::cmp::Ordering::Greater => 0.0,
        })
        .collect()
}

pub(crate) fn point_position(arms: &[f64], theta: &[f64]) -> Vector2<f64> {
    arms.iter()
        .zip(theta)
        .fold(Vector2::zeros(), |acc, (a, th)| {
            acc + Vector2::new(a * th.cos(), a * th.sin())
        })
}

/// Column j: `Σ_{l≥j} a_l [-sin θ_l, cos θ_l]`. Built from the distal end so each
/// column is a suffix sum.
pub(crate) fn point_jacobian(arms: &[f64], theta: &[f64]) -> DMatrix<f64> {
    let n = arms.len();
    let mut jac = DMatrix::zeros(2, n);
    let (mut sx, mut sy) = (0.0, 0.0);
    for j in (0..n).rev() {
        sx -= arms[j] * theta[j].sin();
        sy += arms[j] * theta[j].cos();
        jac[(0, j)] = sx;
        jac[(1, j)] = sy;
    }
    jac
}

/// `∂J/∂q_k`: column j is `-Σ_{l≥max(j,k)} a_l u(θ_l)`.
pub(crate) fn point_jacobian_partial(arms: &[f64], theta: &[f64], k: usize) -> DMatrix<f64> {
    let n = arms.len();
    let mut out = DMatrix::zeros(2, n);
    let (mut sx, mut sy) = (0.0, 0.0);
    for j in (0..n).rev() {
        if j >= k {
            sx -= arms[j] * theta[j].cos();
            sy -= arms[j] * theta[j].sin();
        }
        out[(0, j)] = sx;
        out[(1, j)] = sy;
    }
    out
}

/// `J̇ = Σ_k ∂J/∂q_k q̇_k`; column j is `-Σ_{l≥j} a_l u(θ_l) θ̇_l`.
pub(crate) fn point_jacobian_dot(arms: &[f64], theta: &[f64], theta_dot: &[f64]) -> DMatrix<f64> {
    let n = arms.len();
    let mut out = DMatrix::zeros(2, n);
    let (mut sx, mut sy) = (0.0, 0.0);
    for j in (0..n).rev() {
        sx -= arms[j] * theta[j].cos() * theta_dot[j];
        sy -= arms[j] * theta[j].sin() * theta_dot[j];
        out[(0, j)] = sx;
        out[(1, j)] = sy;
    }
    out
}

/// End-effector position `p = h(q)` in the base frame.
pub fn forward_kinematics(chain: &PlanarChain, q: &DVector<f64>) -> Result<Vector2<f64>> {
    chain.check_q(q)?;
    Ok(point_position(
        &end_effector_arms(chain),
        &absolute_angles(q),
    ))
}

/// End-effector Jacobian `J(q)` (2×n), `ṗ = J q̇`.
pub fn jacobian(chain: &PlanarChain, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    chain.check_q(q)?;
    Ok(point_jacobian(
        &end_effector_arms(chain),
        &absolute_angles(q),
    ))
}

/// Time derivative of the end-effector Jacobian along `(q, q̇)`.
pub fn jacobian_dot(
    chain: &PlanarChain,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    chain.check_q(q)?;
    check_dim("joint velocity", chain.n_links(), qdot.len())?;
    Ok(point_jacobian_dot(
        &end_effector_arms(chain),
        &absolute_angles(q),
        &absolute_angles(qdot),
    ))
}

pub fn end_effector_velocity(
    chain: &PlanarChain,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> Result<Vector2<f64>> {
    check_dim("joint velocity", chain.n_links(), qdot.len())?;
    let v = jacobian(chain, q)? * qdot;
    Ok(Vector2::new(v[0], v[1]))
}
