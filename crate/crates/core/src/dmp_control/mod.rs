//! Turning DMP kinematic plans into joint torques.
//!
//! Inverse kinematics maps task-space plans to joint space, an exact
//! inverse-dynamics model produces feedforward torques, and low-gain PD
//! feedback or a velocity-based sliding-mode law closes the loop.

mod feedback;
mod ik;
mod pinv;

pub use feedback::{
    inverse_dynamics_torque, pd_feedback, sliding_mode_torque, InverseDynamicsPlan, PdGains,
    SlidingModeGains,
};
pub use ik::{
    ik_position, ik_velocity_accel, resolve_task_sample, ElbowBranch, IK_TOLERANCE, SINGULAR_DET,
};
pub use pinv::{dls_pinv, DlsPolicy};
