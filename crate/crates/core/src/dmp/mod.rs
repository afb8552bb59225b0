//! Dynamic Movement Primitives.
//!
//! A scalar phase from a [`CanonicalSystem`] drives a [`ForcingTerm`], which in
//! turn drives a critically damped [`TransformationSystem`] per degree of
//! freedom. Weights come from one-shot batch regression on a demonstration
//! ([`imitation_learn`]); online modulation is provided by goal dynamics and
//! the obstacle [`coupling_term`].

mod canonical;
mod coupling;
mod forcing;
mod goal;
mod learning;
mod rollout;
mod transformation;
mod weights;

use serde::{Deserialize, Serialize};

pub use canonical::CanonicalSystem;
pub use coupling::{coupling_term, coupling_term_rotated, CouplingRotation, ObstacleCoupling};
pub use forcing::{default_basis, ForcingEval, ForcingTerm};
pub use goal::{GoalDynamics, GoalFilter, SecondOrderGoal};
pub use learning::{
    imitation_learn, regression_weight, target_forcing, DemoTrajectory, LearnedPrimitive,
    LearningConfig,
};
pub use rollout::{multi_dof_rollout, Diagnostics, MultiDofDmp, PlanSample, Rollout};
pub use transformation::TransformationSystem;
pub use weights::{read_weights, write_weights, WeightRecord};

/// Discrete (point-to-point) or rhythmic (periodic) primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Discrete,
    Rhythmic,
}
