use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::spec::{
    ControllerKind, ControllerSpec, DmpSpec, Event, GoalSpec, ScenarioId, ScenarioSpec, Space,
    TrackingSpec,
};
use crate::dmp::{
    imitation_learn, CanonicalSystem, DemoTrajectory, GoalDynamics, GoalFilter, LearningConfig,
    MultiDofDmp, PrimitiveKind, SecondOrderGoal,
};
use crate::dmp_control::{
    inverse_dynamics_torque, pd_feedback, resolve_task_sample, sliding_mode_torque,
};
use crate::dynamics::{
    end_effector_velocity, forward_kinematics, jacobian, kinetic_energy, step, wall_contact_force,
    ContactWall, ExternalForce, PlanarChain, RobotState,
};
use crate::eda::{EdaController, VirtualTrajectory};
use crate::error::Result;
use crate::linalg::conditioning;

/// Version tag written at the top of exported traces.
pub const TRACE_SCHEMA: &str = "motorprim-trace v1";

/// Why and when a run stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    #[serde(rename = "time_s")]
    pub time: f64,
    pub reason: String,
}

/// One sampled tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub p: [f64; 2],
    pub pdot: [f64; 2],
    pub tau: Vec<f64>,
    /// Reference with events, in the scenario space.
    pub reference: Vec<f64>,
    /// DMP plan or EDA virtual trajectory, in the scenario space.
    pub plan: Vec<f64>,
    /// Current DMP goal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<f64>>,
    /// Energy modulation factor of an energy-modulated operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Controller energy `T + U` of an energy-modulated operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_c: Option<f64>,
    pub kinetic: f64,
    /// `σ_min / σ_max` of the Jacobian.
    pub conditioning: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle_distance: Option<f64>,
    pub repulsion_capped: bool,
}

impl TraceRow {
    /// Configuration in the scenario space.
    pub fn position(&self, space: Space) -> Vec<f64> {
        match space {
            Space::Joint => self.q.clone(),
            Space::Task => self.p.to_vec(),
        }
    }

    pub fn tracking_error(&self, space: Space) -> f64 {
        distance(&self.position(space), &self.reference)
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub id: ScenarioId,
    pub controller: ControllerKind,
    pub space: Space,
    pub n_links: usize,
    #[serde(rename = "dt_s")]
    pub dt: f64,
    pub rows: Vec<TraceRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    /// Basis functions whose weights came out of a degenerate regression.
    pub degenerate_weights: usize,
    /// Ticks on which the forcing normalizer was degenerate.
    pub degenerate_forcing: usize,
    /// Ticks on which the coupling term was skipped.
    pub degenerate_coupling: usize,
}

impl SimTrace {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Flat column names; per-joint and per-coordinate columns are indexed.
    pub fn csv_header(&self) -> Vec<String> {
        let n = self.n_links;
        let m = self.rows.first().map_or(0, |r| r.reference.len());
        let mut h = vec!["t".to_string()];
        let idx = |name: &'static str, k: usize| (0..k).map(move |i| format!("{name}{i}"));
        h.extend(idx("q", n));
        h.extend(idx("qdot", n));
        h.extend(["px", "py", "pdx", "pdy"].map(String::from));
        h.extend(idx("tau", n));
        h.extend(idx("ref", m));
        h.extend(idx("plan", m));
        h.extend(idx("goal", m));
        h.extend(
            [
                "lambda",
                "l_c",
                "kinetic",
                "conditioning",
                "obstacle_distance",
                "repulsion_capped",
            ]
            .map(String::from),
        );
        h
    }

    /// Row cells in [`csv_header`](Self::csv_header) order; `None` is an empty cell.
    pub fn csv_row(&self, row: &TraceRow) -> Vec<Option<f64>> {
        let m = row.reference.len();
        let some = |v: &[f64]| v.iter().map(|x| Some(*x)).collect::<Vec<_>>();
        let mut out = vec![Some(row.t)];
        out.extend(some(&row.q));
        out.extend(some(&row.qdot));
        out.extend(some(&row.p));
        out.extend(some(&row.pdot));
        out.extend(some(&row.tau));
        out.extend(some(&row.reference));
        out.extend(some(&row.plan));
        match &row.goal {
            Some(g) => out.extend(some(g)),
            None => out.extend(std::iter::repeat_n(None, m)),
        }
        out.extend([
            row.lambda,
            row.l_c,
            Some(row.kinetic),
            Some(row.conditioning),
            row.obstacle_distance,
            Some(if row.repulsion_capped { 1.0 } else { 0.0 }),
        ]);
        out
    }
}

struct Command {
    tau: DVector<f64>,
    plan: Vec<f64>,
    goal: Option<Vec<f64>>,
    lambda: Option<f64>,
    l_c: Option<f64>,
    capped: bool,
}

struct DmpRuntime {
    dmp: MultiDofDmp,
    space: Space,
    tracking: TrackingSpec,
    branch: crate::dmp_control::ElbowBranch,
    degenerate_weights: usize,
}

enum Runtime {
    Dmp(Box<DmpRuntime>),
    Eda {
        ctrl: EdaController,
        vt: Option<VirtualTrajectory>,
    },
}

fn build_dmp(spec: &ScenarioSpec, d: &DmpSpec) -> Result<DmpRuntime> {
    let dim = spec.reference_dim();
    let times: Vec<f64> = (0..d.n_samples)
        .map(|i| d.demo_window * i as f64 / (d.n_samples - 1) as f64)
        .collect();
    let reference = &spec.reference;
    let demo = DemoTrajectory::sampled(times, dim, |t| {
        let k = reference.eval(t);
        (
            k.position.as_slice().to_vec(),
            k.velocity.as_slice().to_vec(),
            k.acceleration.as_slice().to_vec(),
        )
    })?;
    let cs = match d.kind {
        PrimitiveKind::Discrete => CanonicalSystem::discrete(d.tau, d.alpha_s)?,
        PrimitiveKind::Rhythmic => CanonicalSystem::rhythmic(d.tau)?,
    };
    let config = LearningConfig {
        alpha_z: d.alpha_z,
        beta_z: d.beta_z,
        n_basis: d.n_basis,
        amplitude: d.amplitude,
    };
    let learned = imitation_learn(&demo, &cs, &config)?;
    let degenerate_weights = learned.iter().map(|l| l.degenerate_weights.len()).sum();
    let goals = learned
        .iter()
        .map(|l| {
            Ok(match d.goal {
                GoalSpec::Fixed => GoalDynamics::Fixed(l.goal),
                GoalSpec::FirstOrder { alpha_g } => {
                    GoalDynamics::FirstOrder(GoalFilter::new(alpha_g, d.tau, l.goal)?)
                }
                GoalSpec::SecondOrder { tau_s, alpha, beta } => {
                    GoalDynamics::SecondOrder(SecondOrderGoal::new(tau_s, alpha, beta, l.goal)?)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dmp =
        MultiDofDmp::from_learned(cs, d.alpha_z, d.beta_z, &learned)?.with_goal_dynamics(goals)?;
    if let Some(c) = d.coupling {
        dmp = dmp.with_coupling(c)?;
    }
    Ok(DmpRuntime {
        dmp,
        space: spec.space,
        tracking: d.tracking.clone(),
        branch: d.branch,
        degenerate_weights,
    })
}

impl DmpRuntime {
    fn command(&self, chain: &PlanarChain, state: &RobotState) -> Result<Command> {
        let s = self.dmp.sample();
        let col = |v: &[f64]| DVector::from_column_slice(v);
        let v2 = |v: &[f64]| Vector2::new(v[0], v[1]);
        let tau = match (self.space, &self.tracking) {
            (Space::Task, TrackingSpec::SlidingMode { gains, dls }) => sliding_mode_torque(
                chain,
                gains,
                state,
                &v2(&s.position),
                &v2(&s.velocity),
                &v2(&s.acceleration),
                dls,
            )?,
            (space, tracking) => {
                let (q, qd, qdd) = match space {
                    Space::Joint => (col(&s.position), col(&s.velocity), col(&s.acceleration)),
                    Space::Task => resolve_task_sample(
                        chain,
                        &v2(&s.position),
                        &v2(&s.velocity),
                        &v2(&s.acceleration),
                        self.branch,
                    )?,
                };
                let ff = inverse_dynamics_torque(chain, &q, &qd, &qdd)?;
                match tracking {
                    TrackingSpec::FeedforwardPd { gains } => {
                        ff + pd_feedback(gains, &q, &qd, &state.q, &state.qdot)?
                    }
                    _ => ff,
                }
            }
        };
        Ok(Command {
            tau,
            plan: s.position,
            goal: Some(self.dmp.goals()),
            lambda: None,
            l_c: None,
            capped: false,
        })
    }
}

impl Runtime {
    fn new(spec: &ScenarioSpec) -> Result<Self> {
        match &spec.controller {
            ControllerSpec::Dmp(d) => Ok(Self::Dmp(Box::new(build_dmp(spec, d)?))),
            ControllerSpec::Eda(_) => {
                let ctrl = spec.eda_with_events()?.expect("EDA controller");
                let vt = Some(spec.reference_with_events()?);
                Ok(Self::Eda { ctrl, vt })
            }
        }
    }

    fn command(&self, chain: &PlanarChain, state: &RobotState, t: f64) -> Result<Command> {
        match self {
            Self::Dmp(d) => d.command(chain, state),
            Self::Eda { ctrl, vt } => {
                let out = ctrl.output(chain, state, t)?;
                let plan = vt
                    .as_ref()
                    .map(|vt| vt.eval(t).position.as_slice().to_vec())
                    .unwrap_or_default();
                Ok(Command {
                    tau: out.torque,
                    plan,
                    goal: None,
                    lambda: out.energy.map(|e| e.lambda),
                    l_c: out.energy.map(|e| e.total),
                    capped: out.repulsion_capped,
                })
            }
        }
    }
}

/// Integrates a scenario at its fixed step.
///
/// Controller or integrator errors during the run stop it and are recorded
/// in [`SimTrace::failure`]; only an invalid spec is returned as `Err`.
pub fn run(spec: &ScenarioSpec) -> Result<SimTrace> {
    spec.validate()?;
    let chain = &spec.chain;
    let reference = spec.reference_with_events()?;
    let mut runtime = Runtime::new(spec)?;
    let mut state = spec.initial_state()?;
    let wall: Option<ContactWall> = spec.wall.map(|w| ContactWall {
        removal_time: spec.wall_removal_time().unwrap_or(w.removal_time),
        ..w
    });
    let goal_switches: Vec<(f64, Vec<f64>)> = spec
        .events
        .iter()
        .filter_map(|e| match e {
            Event::GoalSwitch { time_s, goal, .. } => Some((*time_s, goal.as_slice().to_vec())),
            _ => None,
        })
        .collect();
    let mut next_switch = 0;
    let steps = (spec.duration / spec.dt).round() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    let mut failure = None;

    for k in 0..=steps {
        let t = k as f64 * spec.dt;
        state.t = t;
        if let Runtime::Dmp(d) = &mut runtime {
            while next_switch < goal_switches.len()
                && goal_switches[next_switch].0 <= t + 0.5 * spec.dt
            {
                if let Err(e) = d.dmp.set_goal_target(&goal_switches[next_switch].1) {
                    failure = Some(Failure {
                        time: t,
                        reason: e.to_string(),
                    });
                }
                next_switch += 1;
            }
        }
        if failure.is_some() {
            break;
        }
        let cmd = match runtime.command(chain, &state, t) {
            Ok(c) => c,
            Err(e) => {
                failure = Some(Failure {
                    time: t,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let row = match record(spec, &state, &cmd, &reference, t) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(Failure {
                    time: t,
                    reason: e.to_string(),
                });
                break;
            }
        };
        rows.push(row);
        if k == steps {
            break;
        }
        let ext = match &wall {
            Some(w) => {
                let p = Vector2::new(rows[k].p[0], rows[k].p[1]);
                let pdot = Vector2::new(rows[k].pdot[0], rows[k].pdot[1]);
                ExternalForce::at_end_effector(wall_contact_force(w, &p, &pdot, t))
            }
            None => ExternalForce::none(),
        };
        let next = step(chain, &state, &cmd.tau, &ext, spec.dt).and_then(|s| {
            if let Runtime::Dmp(d) = &mut runtime {
                d.dmp.advance(spec.dt)?;
            }
            Ok(s)
        });
        match next {
            Ok(s) => state = s,
            Err(e) => {
                failure = Some(Failure {
                    time: t + spec.dt,
                    reason: e.to_string(),
                });
                break;
            }
        }
    }

    let (degenerate_weights, degenerate_forcing, degenerate_coupling) = match &runtime {
        Runtime::Dmp(d) => {
            let diag = d.dmp.diagnostics();
            (
                d.degenerate_weights,
                diag.degenerate_forcing,
                diag.degenerate_coupling,
            )
        }
        Runtime::Eda { .. } => (0, 0, 0),
    };
    Ok(SimTrace {
        id: spec.id,
        controller: spec.controller.kind(),
        space: spec.space,
        n_links: chain.n_links(),
        dt: spec.dt,
        rows,
        failure,
        degenerate_weights,
        degenerate_forcing,
        degenerate_coupling,
    })
}

fn record(
    spec: &ScenarioSpec,
    state: &RobotState,
    cmd: &Command,
    reference: &VirtualTrajectory,
    t: f64,
) -> Result<TraceRow> {
    let chain = &spec.chain;
    let p = forward_kinematics(chain, &state.q)?;
    let pdot = end_effector_velocity(chain, &state.q, &state.qdot)?;
    let j = jacobian(chain, &state.q)?;
    Ok(TraceRow {
        t,
        q: state.q.as_slice().to_vec(),
        qdot: state.qdot.as_slice().to_vec(),
        p: [p.x, p.y],
        pdot: [pdot.x, pdot.y],
        tau: cmd.tau.as_slice().to_vec(),
        reference: reference.eval(t).position.as_slice().to_vec(),
        plan: cmd.plan.clone(),
        goal: cmd.goal.clone(),
        lambda: cmd.lambda,
        l_c: cmd.l_c,
        kinetic: kinetic_energy(chain, &state.q, &state.qdot)?,
        conditioning: conditioning(&j),
        obstacle_distance: spec.obstacle.map(|o| (o - p).norm()),
        repulsion_capped: cmd.capped,
    })
}
