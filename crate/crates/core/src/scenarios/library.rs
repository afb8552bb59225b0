use std::f64::consts::{PI, TAU};

use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::spec::{
    ControllerKind, ControllerSpec, DmpSpec, Event, GoalSpec, InitialConfig, Override, ScenarioId,
    ScenarioSpec, Space, TrackingSpec,
};
use crate::dmp::{CouplingRotation, ObstacleCoupling, PrimitiveKind};
use crate::dmp_control::{DlsPolicy, ElbowBranch, PdGains, SlidingModeGains};
use crate::dynamics::{ContactWall, PlanarChain, DEFAULT_DT};
use crate::eda::{
    EdaController, ImpedanceOp, Oscillation, Submovement, VirtualTrajectory, VtTerm,
    DEFAULT_DAMPING_RATIO,
};
use crate::error::{Error, Result};
use crate::linalg::scaled_identity;

/// Alternative controller configurations of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Default,
    /// DMP tracking without joint feedback.
    FeedforwardOnly,
    /// EDA task impedance without energy modulation.
    Unmodulated,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Self::Default),
            "feedforward-only" => Ok(Self::FeedforwardOnly),
            "unmodulated" => Ok(Self::Unmodulated),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant `{other}`"
            ))),
        }
    }
}

const NOMINAL_START: [f64; 2] = [0.0, 0.52];
const NOMINAL_GOAL: [f64; 2] = [0.0, 1.72];
const SINGULAR_GOAL: [f64; 2] = [0.0, 2.0];
const OBSTACLE: [f64; 2] = [0.0, 1.14];
const OBSTACLE_SHIFT: f64 = 0.02;
const TOLERANCE: f64 = 1e-2;
/// Step at which the sliding-mode loop on the light distal links stays stable.
const REDUNDANT_DT: f64 = 5e-4;

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn min_jerk_vt(start: &[f64], goal: &[f64], duration: f64) -> Result<VirtualTrajectory> {
    Ok(VirtualTrajectory::submovement(Submovement::new(
        v(start),
        v(goal),
        duration,
        0.0,
    )?))
}

fn oscillation_vt(osc: Oscillation) -> Result<VirtualTrajectory> {
    VirtualTrajectory::from_terms(osc.dim(), vec![VtTerm::Oscillation(osc)])
}

fn on_reference(vt: &VirtualTrajectory, space: Space, seed: Option<Vec<f64>>) -> InitialConfig {
    let k = vt.eval(0.0);
    match space {
        Space::Joint => InitialConfig::Joint {
            q: k.position,
            qdot: k.velocity,
        },
        Space::Task => InitialConfig::Task {
            p: Vector2::new(k.position[0], k.position[1]),
            pdot: Vector2::new(k.velocity[0], k.velocity[1]),
            branch: ElbowBranch::Up,
            seed,
        },
    }
}

fn discrete_dmp(tau: f64, window: f64, tracking: TrackingSpec) -> DmpSpec {
    DmpSpec {
        kind: PrimitiveKind::Discrete,
        alpha_z: 10.0,
        beta_z: 2.5,
        alpha_s: 1.0,
        tau,
        n_basis: 50,
        amplitude: 1.0,
        n_samples: 100,
        demo_window: window,
        goal: GoalSpec::Fixed,
        coupling: None,
        tracking,
        branch: ElbowBranch::Up,
    }
}

fn rhythmic_dmp(period: f64, tracking: TrackingSpec) -> DmpSpec {
    DmpSpec {
        kind: PrimitiveKind::Rhythmic,
        alpha_z: 10.0,
        beta_z: 2.5,
        alpha_s: 0.0,
        tau: period / TAU,
        n_basis: 40,
        amplitude: 1.0,
        n_samples: 100,
        demo_window: period,
        goal: GoalSpec::Fixed,
        coupling: None,
        tracking,
        branch: ElbowBranch::Up,
    }
}

fn joint_eda(n: usize, q0: VirtualTrajectory) -> Result<EdaController> {
    Ok(EdaController::new(vec![ImpedanceOp::joint_impedance(
        scaled_identity(n, 150.0),
        scaled_identity(n, 50.0),
        q0,
    )?]))
}

fn task_op(kp: f64, bp: f64, p0: VirtualTrajectory) -> Result<ImpedanceOp> {
    ImpedanceOp::task_impedance(scaled_identity(2, kp), scaled_identity(2, bp), p0)
}

struct Parts {
    chain: PlanarChain,
    initial: InitialConfig,
    space: Space,
    reference: VirtualTrajectory,
    dmp: DmpSpec,
    eda: EdaController,
    duration: f64,
    dt: f64,
    events: Vec<Event>,
    wall: Option<ContactWall>,
    obstacle: Option<Vector2<f64>>,
}

impl Parts {
    fn plain(
        chain: PlanarChain,
        space: Space,
        reference: VirtualTrajectory,
        dmp: DmpSpec,
        eda: EdaController,
        duration: f64,
    ) -> Self {
        let initial = on_reference(&reference, space, None);
        Self {
            chain,
            initial,
            space,
            reference,
            dmp,
            eda,
            duration,
            dt: DEFAULT_DT,
            events: Vec::new(),
            wall: None,
            obstacle: None,
        }
    }
}

fn task_discrete(goal: [f64; 2]) -> Result<Parts> {
    let reference = min_jerk_vt(&NOMINAL_START, &goal, 1.0)?;
    let eda = EdaController::new(vec![task_op(60.0, 20.0, reference.clone())?]);
    Ok(Parts::plain(
        PlanarChain::unit_bars(2),
        Space::Task,
        reference,
        discrete_dmp(1.0, 1.0, TrackingSpec::Feedforward),
        eda,
        3.0,
    ))
}

fn discrete_plus_rhythmic(space: Space) -> Result<Parts> {
    let (osc, start, target, period) = match space {
        Space::Joint => (
            Oscillation::sinusoid(v(&[0.5, 0.5]), v(&[0.1, 0.3]), PI, 0.0)?,
            v(&[0.5, 0.5]),
            v(&[1.5, 1.5]),
            2.0,
        ),
        Space::Task => (
            Oscillation::circle(v(&[-0.47, 0.9]), 0.3, PI, 0.0)?,
            v(&[-0.47, 0.9]),
            v(&[0.53, 0.9]),
            2.0,
        ),
    };
    let reference = oscillation_vt(osc)?;
    let mut dmp = rhythmic_dmp(period, TrackingSpec::Feedforward);
    dmp.goal = GoalSpec::SecondOrder {
        tau_s: 1.0,
        alpha: 10.0,
        beta: 2.5,
    };
    let eda = match space {
        Space::Joint => joint_eda(2, reference.clone())?,
        Space::Task => EdaController::new(vec![task_op(90.0, 60.0, reference.clone())?]),
    };
    let mut parts = Parts::plain(PlanarChain::unit_bars(2), space, reference, dmp, eda, 15.0);
    parts.events = [(3.5, &target), (8.5, &start), (13.5, &target)]
        .into_iter()
        .map(|(time_s, goal)| Event::GoalSwitch {
            time_s,
            goal: goal.clone(),
            duration_s: 1.0,
        })
        .collect();
    Ok(parts)
}

fn sequencing(
    chain: PlanarChain,
    start: [f64; 2],
    g_old: [f64; 2],
    g_new: [f64; 2],
    t1: f64,
    t2: f64,
    t_g: f64,
    redundant: bool,
) -> Result<Parts> {
    let reference = min_jerk_vt(&start, &g_old, t1)?;
    let (mut dmp, eda, seed, duration) = if redundant {
        let n = chain.n_links();
        let tracking = TrackingSpec::SlidingMode {
            gains: SlidingModeGains::diagonal(n, 80.0, 100.0)?,
            dls: DlsPolicy::default(),
        };
        let eda = EdaController::new(vec![
            task_op(300.0, 100.0, reference.clone())?,
            ImpedanceOp::joint_damping(scaled_identity(n, 30.0))?,
        ]);
        (
            discrete_dmp(t1, t1, tracking),
            eda,
            Some(redundant_seed(&start)),
            12.0,
        )
    } else {
        let eda = EdaController::new(vec![task_op(60.0, 20.0, reference.clone())?]);
        (
            discrete_dmp(t1, t1, TrackingSpec::Feedforward),
            eda,
            None,
            10.0,
        )
    };
    dmp.goal = GoalSpec::FirstOrder { alpha_g: 1.0 };
    let mut parts = Parts::plain(chain, Space::Task, reference, dmp, eda, duration);
    if redundant {
        parts.dt = REDUNDANT_DT;
    }
    parts.initial = on_reference(&parts.reference, Space::Task, seed);
    parts.events = vec![Event::GoalSwitch {
        time_s: t_g,
        goal: v(&g_new),
        duration_s: t2,
    }];
    Ok(parts)
}

fn redundant_seed(start: &[f64; 2]) -> Vec<f64> {
    if start[0] < 0.0 {
        vec![1.2, 0.6, 0.6, 0.6, 0.6]
    } else {
        vec![0.6, 0.6, 0.6, 0.6, 0.6]
    }
}

#[allow(clippy::approx_constant)]
fn parts(id: ScenarioId) -> Result<Parts> {
    match id {
        ScenarioId::JointDiscrete => {
            let reference = min_jerk_vt(&[0.0, 0.0], &[1.0, 1.0], 1.0)?;
            let eda = joint_eda(2, reference.clone())?;
            Ok(Parts::plain(
                PlanarChain::unit_bars(2),
                Space::Joint,
                reference,
                discrete_dmp(1.0, 1.0, TrackingSpec::Feedforward),
                eda,
                3.0,
            ))
        }
        ScenarioId::TaskDiscrete => task_discrete(NOMINAL_GOAL),
        ScenarioId::TaskDiscreteSingular => task_discrete(SINGULAR_GOAL),
        ScenarioId::UnexpectedContact => {
            let mut p = task_discrete(NOMINAL_GOAL)?;
            let height = 0.5 * (NOMINAL_START[1] + NOMINAL_GOAL[1]);
            p.wall = Some(ContactWall::ceiling(height, 2.0));
            p.dmp.tracking = TrackingSpec::FeedforwardPd {
                gains: PdGains::diagonal(2, 50.0, 30.0)?,
            };
            p.eda = EdaController::new(vec![ImpedanceOp::energy_modulated_task(
                scaled_identity(2, 60.0),
                DEFAULT_DAMPING_RATIO,
                p.reference.clone(),
                2.5,
            )?]);
            p.duration = 6.0;
            Ok(p)
        }
        ScenarioId::ObstacleAvoid => {
            let mut p = task_discrete(NOMINAL_GOAL)?;
            let obstacle = Vector2::new(OBSTACLE[0], OBSTACLE[1]);
            let shifted = obstacle + Vector2::new(OBSTACLE_SHIFT, 0.0);
            p.obstacle = Some(obstacle);
            p.dmp.coupling = Some(ObstacleCoupling {
                obstacle: shifted,
                gamma: 300.0,
                beta: 3.0,
                rotation: CouplingRotation::Counterclockwise,
            });
            p.eda
                .ops
                .push(ImpedanceOp::repulsive_point(0.1, 6, shifted)?);
            p.duration = 4.0;
            Ok(p)
        }
        ScenarioId::RhythmicJoint => {
            let reference = oscillation_vt(Oscillation::sinusoid(
                v(&[0.5, 0.5]),
                v(&[0.1, 0.3]),
                PI,
                0.0,
            )?)?;
            let eda = joint_eda(2, reference.clone())?;
            Ok(Parts::plain(
                PlanarChain::unit_bars(2),
                Space::Joint,
                reference,
                rhythmic_dmp(2.0, TrackingSpec::Feedforward),
                eda,
                6.0,
            ))
        }
        ScenarioId::RhythmicTask => {
            let reference = oscillation_vt(Oscillation::circle(v(&[0.0, 1.4142]), 0.5, PI, 0.0)?)?;
            let eda = EdaController::new(vec![task_op(90.0, 60.0, reference.clone())?]);
            Ok(Parts::plain(
                PlanarChain::unit_bars(2),
                Space::Task,
                reference,
                rhythmic_dmp(2.0, TrackingSpec::Feedforward),
                eda,
                6.0,
            ))
        }
        ScenarioId::DiscretePlusRhythmicJoint => discrete_plus_rhythmic(Space::Joint),
        ScenarioId::DiscretePlusRhythmicTask => discrete_plus_rhythmic(Space::Task),
        ScenarioId::Sequencing => sequencing(
            PlanarChain::unit_bars(2),
            NOMINAL_START,
            [-0.7, 1.22],
            [0.8, 1.72],
            1.0,
            1.0,
            0.5,
            false,
        ),
        ScenarioId::RedundantDiscrete => {
            let chain = PlanarChain::unit_bars(5);
            let reference = min_jerk_vt(&[0.0, 3.0], &[3.0, 3.0], 2.0)?;
            let tracking = TrackingSpec::SlidingMode {
                gains: SlidingModeGains::diagonal(5, 80.0, 100.0)?,
                dls: DlsPolicy::default(),
            };
            let eda = EdaController::new(vec![
                task_op(300.0, 100.0, reference.clone())?,
                ImpedanceOp::joint_damping(scaled_identity(5, 30.0))?,
            ]);
            let mut p = Parts::plain(
                chain,
                Space::Task,
                reference,
                discrete_dmp(2.0, 2.0, tracking),
                eda,
                8.0,
            );
            p.dt = REDUNDANT_DT;
            p.initial = on_reference(&p.reference, Space::Task, Some(redundant_seed(&[0.0, 3.0])));
            Ok(p)
        }
        ScenarioId::RedundantSequencing => sequencing(
            PlanarChain::unit_bars(5),
            [-1.62, 0.76],
            [-3.62, 1.76],
            [2.38, 3.26],
            2.0,
            3.0,
            1.0,
            true,
        ),
    }
}

/// Default spec of a scenario for one controller, with overrides applied.
pub fn build_scenario(
    id: ScenarioId,
    controller: ControllerKind,
    overrides: &[Override],
) -> Result<ScenarioSpec> {
    build_scenario_variant(id, controller, Variant::Default, overrides)
}

/// Like [`build_scenario`] with an alternative controller configuration.
pub fn build_scenario_variant(
    id: ScenarioId,
    controller: ControllerKind,
    variant: Variant,
    overrides: &[Override],
) -> Result<ScenarioSpec> {
    let mut p = parts(id)?;
    match (variant, controller) {
        (Variant::Default, _) => {}
        (Variant::FeedforwardOnly, ControllerKind::Dmp)
            if !matches!(p.dmp.tracking, TrackingSpec::SlidingMode { .. }) =>
        {
            p.dmp.tracking = TrackingSpec::Feedforward;
        }
        (Variant::Unmodulated, ControllerKind::Eda) => {
            for op in &mut p.eda.ops {
                if let ImpedanceOp::EnergyModulatedTask { kp, c, p0, .. } = op {
                    let bp = &*kp * *c;
                    *op = ImpedanceOp::task_impedance(kp.clone(), bp, p0.clone())?;
                }
            }
        }
        (variant, controller) => {
            return Err(Error::InvalidParameter(format!(
                "variant {variant:?} does not apply to {controller} on {id}"
            )))
        }
    }
    let spec = ScenarioSpec {
        id,
        chain: p.chain,
        initial: p.initial,
        space: p.space,
        reference: p.reference,
        controller: match controller {
            ControllerKind::Dmp => ControllerSpec::Dmp(p.dmp),
            ControllerKind::Eda => ControllerSpec::Eda(p.eda),
        },
        duration: p.duration,
        dt: p.dt,
        events: p.events,
        wall: p.wall,
        obstacle: p.obstacle,
        tolerance: TOLERANCE,
    };
    spec.validate()?;
    spec.with_overrides(overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::spec::ControllerSpec;

    fn eda_ops(spec: &ScenarioSpec) -> &[ImpedanceOp] {
        match &spec.controller {
            ControllerSpec::Eda(c) => &c.ops,
            ControllerSpec::Dmp(_) => panic!("expected EDA"),
        }
    }

    fn dmp(spec: &ScenarioSpec) -> &DmpSpec {
        match &spec.controller {
            ControllerSpec::Dmp(d) => d,
            ControllerSpec::Eda(_) => panic!("expected DMP"),
        }
    }

    #[test]
    fn joint_discrete_defaults() {
        let spec = build_scenario(ScenarioId::JointDiscrete, ControllerKind::Eda, &[]).unwrap();
        assert_eq!(spec.reference.rest_value(), v(&[1.0, 1.0]));
        let ImpedanceOp::JointImpedance { kq, bq, q0 } = &eda_ops(&spec)[0] else {
            panic!("expected joint impedance")
        };
        assert_eq!(*kq, scaled_identity(2, 150.0));
        assert_eq!(*bq, scaled_identity(2, 50.0));
        let VtTerm::Submovement(sm) = &q0.terms()[0] else {
            panic!()
        };
        assert_eq!(sm.duration, 1.0);
        let spec = build_scenario(ScenarioId::JointDiscrete, ControllerKind::Dmp, &[]).unwrap();
        let d = dmp(&spec);
        assert_eq!(
            (d.alpha_z, d.beta_z, d.alpha_s, d.tau),
            (10.0, 2.5, 1.0, 1.0)
        );
        assert_eq!((d.n_basis, d.n_samples), (50, 100));
    }

    #[test]
    fn singular_goal_is_at_full_reach() {
        let spec =
            build_scenario(ScenarioId::TaskDiscreteSingular, ControllerKind::Dmp, &[]).unwrap();
        assert_eq!(spec.reference.rest_value(), v(&[0.0, 2.0]));
        assert_eq!(spec.chain.reach(), 2.0);
    }

    #[test]
    fn obstacle_defaults() {
        let spec = build_scenario(ScenarioId::ObstacleAvoid, ControllerKind::Eda, &[]).unwrap();
        assert_eq!(spec.obstacle, Some(Vector2::new(0.0, 1.14)));
        let ImpedanceOp::RepulsivePoint {
            k, n_exp, obstacle, ..
        } = &eda_ops(&spec)[1]
        else {
            panic!()
        };
        assert_eq!((*k, *n_exp), (0.1, 6));
        assert!((obstacle - Vector2::new(0.02, 1.14)).norm() < 1e-15);
        let spec = build_scenario(ScenarioId::ObstacleAvoid, ControllerKind::Dmp, &[]).unwrap();
        let c = dmp(&spec).coupling.unwrap();
        assert_eq!(c.gamma, 300.0);
    }

    #[test]
    fn redundancy_defaults() {
        let spec = build_scenario(ScenarioId::RedundantDiscrete, ControllerKind::Dmp, &[]).unwrap();
        assert_eq!(spec.chain.n_links(), 5);
        let TrackingSpec::SlidingMode { gains, .. } = &dmp(&spec).tracking else {
            panic!()
        };
        assert_eq!(gains.lambda1, scaled_identity(2, 80.0));
        assert_eq!(gains.lambda2, scaled_identity(5, 100.0));
        assert_eq!(dmp(&spec).tau, 2.0);
        let spec = build_scenario(ScenarioId::RedundantDiscrete, ControllerKind::Eda, &[]).unwrap();
        let ops = eda_ops(&spec);
        assert!(matches!(&ops[0], ImpedanceOp::TaskImpedance { kp, bp, .. }
            if *kp == scaled_identity(2, 300.0) && *bp == scaled_identity(2, 100.0)));
        assert!(
            matches!(&ops[1], ImpedanceOp::JointDamping { bq } if *bq == scaled_identity(5, 30.0))
        );
    }

    #[test]
    fn sequencing_defaults() {
        let spec = build_scenario(ScenarioId::Sequencing, ControllerKind::Dmp, &[]).unwrap();
        assert_eq!(dmp(&spec).goal, GoalSpec::FirstOrder { alpha_g: 1.0 });
        assert_eq!(
            spec.events,
            vec![Event::GoalSwitch {
                time_s: 0.5,
                goal: v(&[0.8, 1.72]),
                duration_s: 1.0
            }]
        );
    }

    #[test]
    fn contact_variants() {
        let spec = build_scenario(ScenarioId::UnexpectedContact, ControllerKind::Eda, &[]).unwrap();
        assert!(
            matches!(&eda_ops(&spec)[0], ImpedanceOp::EnergyModulatedTask { l_max, .. } if *l_max == 2.5)
        );
        let spec = build_scenario_variant(
            ScenarioId::UnexpectedContact,
            ControllerKind::Eda,
            Variant::Unmodulated,
            &[],
        )
        .unwrap();
        assert!(matches!(
            &eda_ops(&spec)[0],
            ImpedanceOp::TaskImpedance { .. }
        ));
        let spec = build_scenario(ScenarioId::UnexpectedContact, ControllerKind::Dmp, &[]).unwrap();
        assert!(
            matches!(&dmp(&spec).tracking, TrackingSpec::FeedforwardPd { gains }
            if gains.kq == scaled_identity(2, 50.0) && gains.bq == scaled_identity(2, 30.0))
        );
        let spec = build_scenario_variant(
            ScenarioId::UnexpectedContact,
            ControllerKind::Dmp,
            Variant::FeedforwardOnly,
            &[],
        )
        .unwrap();
        assert_eq!(dmp(&spec).tracking, TrackingSpec::Feedforward);
        assert!(build_scenario_variant(
            ScenarioId::JointDiscrete,
            ControllerKind::Dmp,
            Variant::Unmodulated,
            &[]
        )
        .is_err());
    }

    #[test]
    fn rhythmic_tau_is_period_over_two_pi() {
        let spec = build_scenario(ScenarioId::RhythmicJoint, ControllerKind::Dmp, &[]).unwrap();
        let d = dmp(&spec);
        assert!((d.tau - 2.0 / TAU).abs() < 1e-15);
        assert_eq!((d.n_basis, d.amplitude), (40, 1.0));
    }

    #[test]
    fn variants_parse() {
        assert_eq!(
            "unmodulated".parse::<Variant>().unwrap(),
            Variant::Unmodulated
        );
        assert!("other".parse::<Variant>().is_err());
    }
}
