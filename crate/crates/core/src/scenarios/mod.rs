//! Reference experiments, a closed-loop runner and trace metrics.
//!
//! A [`ScenarioSpec`] fully describes one run: chain, initial configuration,
//! reference motion, timed events, environment and either a DMP or an EDA
//! controller. [`run`] integrates it at a fixed step and [`metrics`] reduces
//! the resulting [`SimTrace`].

mod library;
mod metrics;
mod runner;
mod spec;

pub use library::{build_scenario, build_scenario_variant, Variant};
pub use metrics::{metrics, Metrics};
pub use runner::{run, Failure, SimTrace, TraceRow, TRACE_SCHEMA};
pub use spec::{
    ControllerKind, ControllerSpec, DmpSpec, Event, GoalSpec, InitialConfig, Override, ScenarioId,
    ScenarioSpec, Space, TrackingSpec,
};
