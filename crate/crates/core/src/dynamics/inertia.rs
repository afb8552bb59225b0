use nalgebra::{DMatrix, DVector};

use super::chain::PlanarChain;
use super::kinematics::{absolute_angles, com_arms, point_jacobian, point_jacobian_partial};
use crate::error::{check_dim, Result};

/// Joint-space inertia matrix `M(q) = Σ_i m_i J_{v,i}ᵀ J_{v,i} + I_i J_{ω,i}ᵀ J_{ω,i}`.
pub fn mass_matrix(chain: &PlanarChain, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    chain.check_q(q)?;
    let n = chain.n_links();
    let theta = absolute_angles(q);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let jv = point_jacobian(&com_arms(chain, i), &theta);
        m += jv.tr_mul(&jv) * chain.masses()[i];
        // J_ω,i has ones in columns 0..=i
        let inertia = chain.inertias()[i];
        for r in 0..=i {
            for c in 0..=i {
                m[(r, c)] += inertia;
            }
        }
    }
    Ok(symmetrize(m))
}

/// `∂M/∂q_k`, analytic. The rotational part of `M` is configuration independent.
pub fn mass_matrix_partial(
    chain: &PlanarChain,
    q: &DVector<f64>,
    k: usize,
) -> Result<DMatrix<f64>> {
    chain.check_q(q)?;
    let n = chain.n_links();
    check_dim("mass matrix partial index", n, n.max(k + 1))?;
    let theta = absolute_angles(q);
    let mut dm = DMatrix::zeros(n, n);
    for i in 0..n {
        let arms = com_arms(chain, i);
        let jv = point_jacobian(&arms, &theta);
        let djv = point_jacobian_partial(&arms, &theta, k);
        let cross = djv.tr_mul(&jv);
        dm += (&cross + cross.transpose()) * chain.masses()[i];
    }
    Ok(dm)
}

/// Coriolis/centrifugal matrix from Christoffel symbols of the first kind,
/// `C_ij = Σ_k ½ (∂M_ij/∂q_k + ∂M_ik/∂q_j − ∂M_jk/∂q_i) q̇_k`, so that `Ṁ − 2C`
/// is skew-symmetric.
pub fn coriolis_matrix(
    chain: &PlanarChain,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    chain.check_q(q)?;
    let n = chain.n_links();
    check_dim("joint velocity", n, qdot.len())?;
    if qdot.iter().all(|v| *v == 0.0) {
        return Ok(DMatrix::zeros(n, n));
    }
    let partials = (0..n)
        .map(|k| mass_matrix_partial(chain, q, k))
        .collect::<Result<Vec<_>>>()?;
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                let gamma = partials[k][(i, j)] + partials[j][(i, k)] - partials[i][(j, k)];
                acc += 0.5 * gamma * qdot[k];
            }
            c[(i, j)] = acc;
        }
    }
    Ok(c)
}

/// `½ q̇ᵀ M(q) q̇`.
pub fn kinetic_energy(chain: &PlanarChain, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
    check_dim("joint velocity", chain.n_links(), qdot.len())?;
    let m = mass_matrix(chain, q)?;
    Ok(0.5 * qdot.dot(&(m * qdot)))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
