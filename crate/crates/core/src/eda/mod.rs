//! Elementary Dynamic Actions.
//!
//! Submovements and oscillations compose a [`VirtualTrajectory`]; mechanical
//! impedances ([`ImpedanceOp`]) attach the robot to it and superpose into one
//! torque. Nothing here inverts a Jacobian or a dynamics model.

mod impedance;
mod primitives;
mod trajectory;

pub use impedance::{
    energy_lambda, impedance_force, lambda_from_energies, superpose, EdaController, EdaOutput,
    EnergyEval, ImpedanceEval, ImpedanceOp, DEFAULT_DAMPING_RATIO, DEFAULT_REPULSION_CAP,
};
pub use primitives::{min_jerk, Kinematics, Oscillation, OscillationShape, Submovement};
pub use trajectory::{VirtualTrajectory, VtTerm};
