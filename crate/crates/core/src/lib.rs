//! Motor-primitive robot control on a planar n-link simulator.
//!
//! Two families of controllers share one rigid-body model:
//!
//! * [`dmp`] and [`dmp_control`]: Dynamic Movement Primitives generate kinematic
//!   plans which inverse kinematics and an inverse-dynamics model turn into torques.
//! * [`eda`]: Elementary Dynamic Actions attach superposable mechanical impedances
//!   to virtual trajectories built from submovements and oscillations.
//!
//! [`scenarios`] wires both onto the reference experiments and reduces the
//! resulting traces into comparable metrics.

pub mod dmp;
pub mod dmp_control;
pub mod dynamics;
pub mod eda;
pub mod error;
pub mod linalg;
pub mod scenarios;

pub use error::{Error, Result};
