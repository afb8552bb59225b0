use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dmp::{ObstacleCoupling, PrimitiveKind};
use crate::dmp_control::{ik_position, DlsPolicy, ElbowBranch, PdGains, SlidingModeGains};
use crate::dynamics::{jacobian, ContactWall, PlanarChain, RobotState};
use crate::eda::{EdaController, ImpedanceOp, VirtualTrajectory};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{plain_vector, plain_vector2};

/// The reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    JointDiscrete,
    TaskDiscrete,
    TaskDiscreteSingular,
    UnexpectedContact,
    ObstacleAvoid,
    RhythmicJoint,
    RhythmicTask,
    DiscretePlusRhythmicJoint,
    DiscretePlusRhythmicTask,
    Sequencing,
    RedundantDiscrete,
    RedundantSequencing,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 12] = [
        Self::JointDiscrete,
        Self::TaskDiscrete,
        Self::TaskDiscreteSingular,
        Self::UnexpectedContact,
        Self::ObstacleAvoid,
        Self::RhythmicJoint,
        Self::RhythmicTask,
        Self::DiscretePlusRhythmicJoint,
        Self::DiscretePlusRhythmicTask,
        Self::Sequencing,
        Self::RedundantDiscrete,
        Self::RedundantSequencing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::JointDiscrete => "joint-discrete",
            Self::TaskDiscrete => "task-discrete",
            Self::TaskDiscreteSingular => "task-discrete-singular",
            Self::UnexpectedContact => "unexpected-contact",
            Self::ObstacleAvoid => "obstacle-avoid",
            Self::RhythmicJoint => "rhythmic-joint",
            Self::RhythmicTask => "rhythmic-task",
            Self::DiscretePlusRhythmicJoint => "discrete-plus-rhythmic-joint",
            Self::DiscretePlusRhythmicTask => "discrete-plus-rhythmic-task",
            Self::Sequencing => "sequencing",
            Self::RedundantDiscrete => "redundant-discrete",
            Self::RedundantSequencing => "redundant-sequencing",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Controller family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Dmp,
    Eda,
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dmp => "dmp",
            Self::Eda => "eda",
        })
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dmp" => Ok(Self::Dmp),
            "eda" => Ok(Self::Eda),
            other => Err(Error::InvalidParameter(format!(
                "unknown controller `{other}`"
            ))),
        }
    }
}

/// Coordinates of the reference motion and of the tracking metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Joint,
    Task,
}

/// Initial robot configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialConfig {
    Joint {
        #[serde(rename = "q_rad", with = "plain_vector")]
        q: DVector<f64>,
        #[serde(rename = "qdot_rad_per_s", with = "plain_vector")]
        qdot: DVector<f64>,
    },
    /// Solved by inverse kinematics on `branch` (2 links) or from `seed` (otherwise).
    Task {
        #[serde(rename = "p_m", with = "plain_vector2")]
        p: Vector2<f64>,
        #[serde(rename = "pdot_m_per_s", with = "plain_vector2")]
        pdot: Vector2<f64>,
        branch: ElbowBranch,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<Vec<f64>>,
    },
}

/// Timed scenario event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    /// New goal in the reference space. EDA superimposes a submovement of
    /// `duration_s`; DMP commands the goal to its goal dynamics.
    GoalSwitch {
        time_s: f64,
        #[serde(with = "plain_vector")]
        goal: DVector<f64>,
        duration_s: f64,
    },
    /// The contact wall disappears.
    ObstacleRemoval { time_s: f64 },
}

impl Event {
    pub fn time(&self) -> f64 {
        match self {
            Self::GoalSwitch { time_s, .. } | Self::ObstacleRemoval { time_s } => *time_s,
        }
    }
}

/// Evolution of the DMP goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GoalSpec {
    Fixed,
    FirstOrder { alpha_g: f64 },
    SecondOrder { tau_s: f64, alpha: f64, beta: f64 },
}

/// How DMP plans become torques.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrackingSpec {
    /// Inverse-dynamics feedforward only.
    Feedforward,
    /// Feedforward plus joint-space PD.
    FeedforwardPd { gains: PdGains },
    /// Velocity-based sliding mode for task-space plans.
    SlidingMode {
        gains: SlidingModeGains,
        #[serde(default)]
        dls: DlsPolicy,
    },
}

/// DMP controller: imitation of the reference, goal dynamics, coupling and tracking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmpSpec {
    pub kind: PrimitiveKind,
    pub alpha_z: f64,
    pub beta_z: f64,
    /// Ignored for rhythmic primitives.
    pub alpha_s: f64,
    #[serde(rename = "tau_s")]
    pub tau: f64,
    #[serde(rename = "N")]
    pub n_basis: usize,
    /// Rhythmic amplitude `r`.
    pub amplitude: f64,
    /// Number of demonstration samples `P`.
    #[serde(rename = "P")]
    pub n_samples: usize,
    /// Demonstration window: the movement duration or one period.
    #[serde(rename = "demo_window_s")]
    pub demo_window: f64,
    pub goal: GoalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<ObstacleCoupling>,
    pub tracking: TrackingSpec,
    /// Elbow branch for 2-link task-space inverse kinematics.
    pub branch: ElbowBranch,
}

/// Controller block of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControllerSpec {
    Dmp(DmpSpec),
    Eda(EdaController),
}

impl ControllerSpec {
    pub fn kind(&self) -> ControllerKind {
        match self {
            Self::Dmp(_) => ControllerKind::Dmp,
            Self::Eda(_) => ControllerKind::Eda,
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub chain: PlanarChain,
    pub initial: InitialConfig,
    pub space: Space,
    /// Nominal motion before events; imitated by DMP, followed by EDA.
    pub reference: VirtualTrajectory,
    pub controller: ControllerSpec,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "dt_s")]
    pub dt: f64,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall: Option<ContactWall>,
    /// True obstacle position, used for clearance metrics.
    #[serde(
        rename = "obstacle_m",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_vector2"
    )]
    pub obstacle: Option<Vector2<f64>>,
    /// Error below which the run counts as converged.
    #[serde(rename = "tolerance")]
    pub tolerance: f64,
}

mod opt_vector2 {
    use nalgebra::Vector2;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vector2<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|v| [v.x, v.y]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vector2<f64>>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|a| Vector2::new(a[0], a[1])))
    }
}

/// Dotted-path replacement applied to the JSON form of a spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: String,
    pub value: Value,
}

impl Override {
    pub fn new(path: impl Into<String>, value: impl Into<Value>) -> Self {
        Self {
            path: path.into(),
            value: value.into(),
        }
    }

    pub fn dt(dt: f64) -> Self {
        Self::new("dt_s", dt)
    }

    pub fn duration(duration: f64) -> Self {
        Self::new("duration_s", duration)
    }

    /// Parses `path=value`; the value is read as JSON, or as a string if that fails.
    pub fn parse(text: &str) -> Result<Self> {
        let (path, raw) = text.split_once('=').ok_or_else(|| Error::InvalidOverride {
            key: text.to_string(),
            reason: "expected path=value".into(),
        })?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Self::new(path.trim(), value))
    }

    fn apply(&self, root: &mut Value) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidOverride {
            key: self.path.clone(),
            reason: reason.to_string(),
        };
        let mut node = root;
        let parts: Vec<&str> = self.path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let last = i + 1 == parts.len();
            node = match node {
                Value::Object(map) => {
                    if !map.contains_key(*part) {
                        return Err(invalid("no such field"));
                    }
                    map.get_mut(*part).expect("checked")
                }
                Value::Array(items) => {
                    let idx: usize = part
                        .parse()
                        .map_err(|_| invalid("expected an array index"))?;
                    items
                        .get_mut(idx)
                        .ok_or_else(|| invalid("index out of range"))?
                }
                _ => return Err(invalid("path descends into a scalar")),
            };
            if last {
                *node = self.value.clone();
            }
        }
        Ok(())
    }
}

impl ScenarioSpec {
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Applies overrides through the serialized form, then re-validates.
    pub fn with_overrides(&self, overrides: &[Override]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut value =
            serde_json::to_value(self).map_err(|e| Error::Serialization(e.to_string()))?;
        for o in overrides {
            o.apply(&mut value)?;
        }
        let spec: Self = serde_json::from_value(value).map_err(|e| Error::InvalidOverride {
            key: overrides
                .iter()
                .map(|o| o.path.as_str())
                .collect::<Vec<_>>()
                .join(","),
            reason: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn reference_dim(&self) -> usize {
        match self.space {
            Space::Joint => self.chain.n_links(),
            Space::Task => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.chain.n_links();
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be >= 0, got {}",
                self.duration
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be > 0".into()));
        }
        check_dim(
            "reference dimension",
            self.reference_dim(),
            self.reference.dim(),
        )?;
        self.reference.validate()?;
        if self.events.windows(2).any(|w| w[1].time() < w[0].time()) {
            return Err(Error::InvalidParameter(
                "events must be time-ordered".into(),
            ));
        }
        for e in &self.events {
            if let Event::GoalSwitch {
                goal, duration_s, ..
            } = e
            {
                check_dim("goal switch", self.reference_dim(), goal.len())?;
                if !(duration_s.is_finite() && *duration_s > 0.0) {
                    return Err(Error::InvalidParameter(
                        "goal switch duration must be > 0".into(),
                    ));
                }
            }
        }
        if let Some(w) = &self.wall {
            w.validate()?;
        }
        match &self.initial {
            InitialConfig::Joint { q, qdot } => {
                check_dim("initial q", n, q.len())?;
                check_dim("initial qdot", n, qdot.len())?;
            }
            InitialConfig::Task { seed, .. } => {
                if let Some(seed) = seed {
                    check_dim("IK seed", n, seed.len())?;
                } else if n != 2 {
                    return Err(Error::InvalidParameter(
                        "task-space initial configuration needs a seed".into(),
                    ));
                }
            }
        }
        match &self.controller {
            ControllerSpec::Eda(ctrl) => ctrl.validate(&self.chain),
            ControllerSpec::Dmp(d) => {
                if d.n_samples < 2 || d.n_basis == 0 {
                    return Err(Error::InvalidParameter(
                        "DMP needs P >= 2 and N >= 1".into(),
                    ));
                }
                if !(d.demo_window.is_finite() && d.demo_window > 0.0) {
                    return Err(Error::InvalidParameter("demo window must be > 0".into()));
                }
                if d.coupling.is_some() && self.space != Space::Task {
                    return Err(Error::InvalidParameter(
                        "obstacle coupling needs a task-space DMP".into(),
                    ));
                }
                match &d.tracking {
                    TrackingSpec::Feedforward => {}
                    TrackingSpec::FeedforwardPd { gains } => {
                        gains.validate()?;
                        check_dim("PD gains", n, gains.kq.nrows())?;
                    }
                    TrackingSpec::SlidingMode { gains, dls } => {
                        gains.validate()?;
                        dls.validate()?;
                        check_dim("Lambda2", n, gains.lambda2.nrows())?;
                        if self.space != Space::Task {
                            return Err(Error::InvalidParameter(
                                "sliding mode tracks task-space plans".into(),
                            ));
                        }
                    }
                }
                if self.space == Space::Task
                    && n != 2
                    && !matches!(d.tracking, TrackingSpec::SlidingMode { .. })
                {
                    return Err(Error::InvalidParameter(
                        "task-space DMP on a redundant chain needs sliding-mode tracking".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Robot state at `t = 0`.
    pub fn initial_state(&self) -> Result<RobotState> {
        match &self.initial {
            InitialConfig::Joint { q, qdot } => RobotState::new(q.clone(), qdot.clone(), 0.0),
            InitialConfig::Task {
                p,
                pdot,
                branch,
                seed,
            } => {
                let seed = seed.as_ref().map(|s| DVector::from_column_slice(s));
                let q = ik_position(&self.chain, p, seed.as_ref(), *branch)?;
                let j = jacobian(&self.chain, &q)?;
                let qdot = DlsPolicy::default().pseudo_inverse(&j)
                    * DVector::from_column_slice(pdot.as_slice());
                RobotState::new(q, qdot, 0.0)
            }
        }
    }

    /// Reference with all goal switches superimposed.
    pub fn reference_with_events(&self) -> Result<VirtualTrajectory> {
        let mut vt = self.reference.clone();
        apply_goal_switches(&mut vt, &self.events)?;
        Ok(vt)
    }

    /// Time at which the contact wall disappears, if there is one.
    pub fn wall_removal_time(&self) -> Option<f64> {
        let wall = self.wall.as_ref()?;
        let event = self.events.iter().find_map(|e| match e {
            Event::ObstacleRemoval { time_s } => Some(*time_s),
            _ => None,
        });
        Some(event.map_or(wall.removal_time, |t| t.min(wall.removal_time)))
    }

    /// EDA controller with goal switches superimposed on the virtual
    /// trajectories that live in the reference space.
    pub fn eda_with_events(&self) -> Result<Option<EdaController>> {
        let ControllerSpec::Eda(ctrl) = &self.controller else {
            return Ok(None);
        };
        let mut ctrl = ctrl.clone();
        for op in &mut ctrl.ops {
            let in_space = matches!(
                (self.space, &*op),
                (Space::Joint, ImpedanceOp::JointImpedance { .. })
                    | (
                        Space::Task,
                        ImpedanceOp::TaskImpedance { .. } | ImpedanceOp::EnergyModulatedTask { .. }
                    )
            );
            if let (true, Some(vt)) = (in_space, op.virtual_trajectory_mut()) {
                apply_goal_switches(vt, &self.events)?;
            }
        }
        Ok(Some(ctrl))
    }
}

fn apply_goal_switches(vt: &mut VirtualTrajectory, events: &[Event]) -> Result<()> {
    for e in events {
        if let Event::GoalSwitch {
            time_s,
            goal,
            duration_s,
        } = e
        {
            vt.redirect(goal, *duration_s, *time_s)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::build_scenario;

    #[test]
    fn ids_round_trip_through_names() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
        assert!(matches!(
            "nope".parse::<ScenarioId>(),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn override_parsing() {
        let o = Override::parse("dt_s=1e-4").unwrap();
        assert_eq!(o.path, "dt_s");
        assert_eq!(o.value, serde_json::json!(1e-4));
        let o = Override::parse("controller.branch=up").unwrap();
        assert_eq!(o.value, Value::String("up".into()));
        assert!(Override::parse("no-equals").is_err());
    }

    #[test]
    fn dt_override_is_carried() {
        let spec = build_scenario(
            ScenarioId::JointDiscrete,
            ControllerKind::Eda,
            &[Override::dt(1e-4)],
        )
        .unwrap();
        assert_eq!(spec.dt, 1e-4);
    }

    #[test]
    fn bad_overrides_are_rejected() {
        let base = build_scenario(ScenarioId::JointDiscrete, ControllerKind::Eda, &[]).unwrap();
        for o in [
            Override::new("no_such_field", 1.0),
            Override::new("dt_s", "fast"),
            Override::new("dt_s", -1.0),
            Override::new("reference.terms.7", 0.0),
            Override::new("dt_s.inner", 0.0),
        ] {
            assert!(
                matches!(
                    base.with_overrides(&[o.clone()]),
                    Err(Error::InvalidOverride { .. } | Error::InvalidParameter(_))
                ),
                "{o:?}"
            );
        }
    }

    #[test]
    fn gain_dimension_override_is_rejected() {
        let base = build_scenario(ScenarioId::JointDiscrete, ControllerKind::Eda, &[]).unwrap();
        let o = Override::new("controller.ops.0.kq", serde_json::json!([[1.0, 0.0, 0.0]]));
        assert!(base.with_overrides(&[o]).is_err());
    }

    #[test]
    fn defaults_round_trip_through_json() {
        for id in ScenarioId::ALL {
            for c in [ControllerKind::Dmp, ControllerKind::Eda] {
                let spec = build_scenario(id, c, &[]).unwrap();
                let back = ScenarioSpec::from_json(&spec.to_json().unwrap()).unwrap();
                assert_eq!(back, spec, "{id} {c}");
            }
        }
    }

    #[test]
    fn validation_catches_structural_errors() {
        let mut spec = build_scenario(ScenarioId::Sequencing, ControllerKind::Dmp, &[]).unwrap();
        spec.dt = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = build_scenario(ScenarioId::Sequencing, ControllerKind::Dmp, &[]).unwrap();
        spec.events
            .insert(0, Event::ObstacleRemoval { time_s: 5.0 });
        assert!(spec.validate().is_err());
        let mut spec = build_scenario(ScenarioId::Sequencing, ControllerKind::Eda, &[]).unwrap();
        spec.events.push(Event::GoalSwitch {
            time_s: 9.0,
            goal: DVector::from_vec(vec![1.0, 1.0, 1.0]),
            duration_s: 1.0,
        });
        assert!(spec.validate().is_err());
        assert!(ScenarioSpec::from_json("{not json").is_err());
    }

    #[test]
    fn removal_event_brings_the_wall_forward() {
        let mut spec =
            build_scenario(ScenarioId::UnexpectedContact, ControllerKind::Eda, &[]).unwrap();
        assert_eq!(spec.wall_removal_time(), Some(2.0));
        spec.events.push(Event::ObstacleRemoval { time_s: 1.5 });
        assert_eq!(spec.wall_removal_time(), Some(1.5));
    }

    #[test]
    fn task_initial_state_sits_on_the_reference() {
        for id in [
            ScenarioId::TaskDiscrete,
            ScenarioId::RedundantDiscrete,
            ScenarioId::RhythmicTask,
        ] {
            let spec = build_scenario(id, ControllerKind::Eda, &[]).unwrap();
            let s = spec.initial_state().unwrap();
            let p = crate::dynamics::forward_kinematics(&spec.chain, &s.q).unwrap();
            let pdot = crate::dynamics::end_effector_velocity(&spec.chain, &s.q, &s.qdot).unwrap();
            let k = spec.reference.eval(0.0);
            assert!(
                (p - Vector2::new(k.position[0], k.position[1])).norm() < 1e-9,
                "{id}"
            );
            assert!(
                (pdot - Vector2::new(k.velocity[0], k.velocity[1])).norm() < 1e-9,
                "{id}"
            );
        }
    }
}
