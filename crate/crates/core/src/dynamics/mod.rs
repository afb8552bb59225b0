//! Planar n-link serial chain: kinematics, differential kinematics, inertial
//! matrices, forward-dynamics integration, and a penalty contact wall.
//!
//! The chain moves in a horizontal plane with gravity compensated, so the
//! equation of motion integrated by [`step`] is `M(q) q̈ + C(q, q̇) q̇ = τ_in + Jᵀ f_ext`.

mod chain;
mod contact;
mod inertia;
mod integrator;
mod kinematics;

pub use chain::{PlanarChain, RobotState};
pub use contact::{wall_contact_force, ContactWall};
pub use inertia::{coriolis_matrix, kinetic_energy, mass_matrix, mass_matrix_partial};
pub use integrator::{forward_acceleration, step, ExternalForce, DEFAULT_DT};
pub use kinematics::{
    absolute_angles, end_effector_velocity, forward_kinematics, jacobian, jacobian_dot,
};
