use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::chain::{PlanarChain, RobotState};
use super::inertia::{coriolis_matrix, mass_matrix};
use super::kinematics::jacobian;
use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::plain_vector2;

pub const DEFAULT_DT: f64 = 1e-3;

/// Point force acting on the end effector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalForce {
    #[serde(with = "plain_vector2")]
    pub point_force: Vector2<f64>,
    pub active: bool,
}

impl ExternalForce {
    pub fn none() -> Self {
        Self {
            point_force: Vector2::zeros(),
            active: false,
        }
    }

    pub fn at_end_effector(force: Vector2<f64>) -> Self {
        Self {
            point_force: force,
            active: true,
        }
    }
}

impl Default for ExternalForce {
    fn default() -> Self {
        Self::none()
    }
}

/// Joint accelerations solving `M q̈ = τ_in + Jᵀ f_ext − C q̇`.
pub fn forward_acceleration(
    chain: &PlanarChain,
    state: &RobotState,
    tau_in: &DVector<f64>,
    ext: &ExternalForce,
) -> Result<DVector<f64>> {
    state.check_for(chain)?;
    check_dim("input torque", chain.n_links(), tau_in.len())?;
    check_finite("input torque", tau_in.as_slice())?;
    let mut rhs = tau_in.clone();
    if ext.active {
        check_finite("external force", ext.point_force.as_slice())?;
        let j = jacobian(chain, &state.q)?;
        rhs += j.transpose() * DVector::from_column_slice(ext.point_force.as_slice());
    }
    rhs -= coriolis_matrix(chain, &state.q, &state.qdot)? * &state.qdot;
    let m = mass_matrix(chain, &state.q)?;
    m.cholesky()
        .map(|chol| chol.solve(&rhs))
        .ok_or(Error::SingularMassMatrix)
}

/// One semi-implicit Euler step: velocities first, then positions with the new
/// velocities. Gravity is taken as compensated.
pub fn step(
    chain: &PlanarChain,
    state: &RobotState,
    tau_in: &DVector<f64>,
    ext: &ExternalForce,
    dt: f64,
) -> Result<RobotState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be > 0, got {dt}"
        )));
    }
    let qddot = forward_acceleration(chain, state, tau_in, ext)?;
    let qdot = &state.qdot + qddot * dt;
    let q = &state.q + &qdot * dt;
    let next = RobotState {
        q,
        qdot,
        t: state.t + dt,
    };
    next.check_finite()?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    #[test]
    fn equilibrium_stays_put() {
        let chain = PlanarChain::unit_bars(2);
        let s0 = RobotState::at_rest(dv(&[0.3, -0.4]));
        let s1 = step(&chain, &s0, &dv(&[0.0, 0.0]), &ExternalForce::none(), 1e-3).unwrap();
        assert_eq!(s1.q, s0.q);
        assert_eq!(s1.qdot, s0.qdot);
        assert!((s1.t - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn constant_torque_on_single_link() {
        let chain = PlanarChain::unit_bars(1);
        // I about the joint = m r² + m l²/12 = 1/4 + 1/12 = 1/3
        let i_tot = 1.0 / 3.0;
        let tau = 0.6;
        let dt = 1e-4;
        let mut s = RobotState::at_rest(dv(&[0.2]));
        let steps = 10_000;
        for _ in 0..steps {
            s = step(&chain, &s, &dv(&[tau]), &ExternalForce::none(), dt).unwrap();
        }
        let t = steps as f64 * dt;
        let exact = 0.2 + 0.5 * tau / i_tot * t * t;
        // semi-implicit Euler overshoots by ½ (τ/I) t dt
        assert!((s.q[0] - exact).abs() < 0.5 * tau / i_tot * t * dt * 1.01);
        assert!((s.qdot[0] - tau / i_tot * t).abs() < 1e-9);
    }

    #[test]
    fn external_force_enters_through_jacobian_transpose() {
        let chain = PlanarChain::unit_bars(2);
        let s = RobotState::at_rest(dv(&[0.0, 0.0]));
        // a +y force at the tip of a stretched arm equals torques Jᵀ f = [2, 1]
        let a_ext = forward_acceleration(
            &chain,
            &s,
            &dv(&[0.0, 0.0]),
            &ExternalForce::at_end_effector(Vector2::new(0.0, 1.0)),
        )
        .unwrap();
        let a_tau =
            forward_acceleration(&chain, &s, &dv(&[2.0, 1.0]), &ExternalForce::none()).unwrap();
        assert!((a_ext - a_tau).amax() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let chain = PlanarChain::unit_bars(2);
        let s = RobotState::at_rest(dv(&[0.0, 0.0]));
        let none = ExternalForce::none();
        assert!(matches!(
            step(&chain, &s, &dv(&[f64::NAN, 0.0]), &none, 1e-3),
            Err(Error::NonFinite(_))
        ));
        assert!(step(&chain, &s, &dv(&[0.0, 0.0]), &none, 0.0).is_err());
        assert!(step(&chain, &s, &dv(&[0.0]), &none, 1e-3).is_err());
    }

    #[test]
    fn step_is_deterministic() {
        let chain = PlanarChain::unit_bars(3);
        let s = RobotState::new(dv(&[0.1, 0.2, 0.3]), dv(&[1.0, -2.0, 0.5]), 0.0).unwrap();
        let tau = dv(&[0.3, -0.1, 0.05]);
        let a = step(&chain, &s, &tau, &ExternalForce::none(), 1e-3).unwrap();
        let b = step(&chain, &s, &tau, &ExternalForce::none(), 1e-3).unwrap();
        assert_eq!(
            a.q.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.q.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(
            a.qdot.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.qdot.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
