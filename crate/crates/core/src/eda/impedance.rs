use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::VirtualTrajectory;
use crate::dynamics::{forward_kinematics, jacobian, kinetic_energy, PlanarChain, RobotState};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{plain_vector2, row_major, validate_gain};

/// `c` in `B_p' = c λ K_p`; with `K_p = 60` it gives `B_p = 20`.
pub const DEFAULT_DAMPING_RATIO: f64 = 1.0 / 3.0;
/// Default bound on the repulsive force magnitude near the obstacle.
pub const DEFAULT_REPULSION_CAP: f64 = 1e4;

const REPULSION_MIN_DISTANCE: f64 = 1e-6;
const NEGLIGIBLE_POTENTIAL: f64 = 1e-12;

fn default_damping_ratio() -> f64 {
    DEFAULT_DAMPING_RATIO
}

fn default_repulsion_cap() -> f64 {
    DEFAULT_REPULSION_CAP
}

/// One superposable mechanical impedance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ImpedanceOp {
    /// `K_q (q₀ − q) + B_q (q̇₀ − q̇)`.
    JointImpedance {
        #[serde(rename = "kq_nm_per_rad", with = "row_major")]
        kq: DMatrix<f64>,
        #[serde(rename = "bq_nms_per_rad", with = "row_major")]
        bq: DMatrix<f64>,
        q0: VirtualTrajectory,
    },
    /// `Jᵀ [K_p (p₀ − p) + B_p (ṗ₀ − ṗ)]`.
    TaskImpedance {
        #[serde(rename = "kp_n_per_m", with = "row_major")]
        kp: DMatrix<f64>,
        #[serde(rename = "bp_ns_per_m", with = "row_major")]
        bp: DMatrix<f64>,
        p0: VirtualTrajectory,
    },
    /// `−B_q q̇`.
    JointDamping {
        #[serde(rename = "bq_nms_per_rad", with = "row_major")]
        bq: DMatrix<f64>,
    },
    /// `Jᵀ [−k (o − p) / ‖o − p‖ⁿ]`.
    RepulsivePoint {
        k: f64,
        n_exp: u32,
        #[serde(rename = "obstacle_m", with = "plain_vector2")]
        obstacle: Vector2<f64>,
        #[serde(rename = "max_force_n", default = "default_repulsion_cap")]
        max_force: f64,
    },
    /// `Jᵀ [λ K_p (p₀ − p) + c λ K_p (ṗ₀ − ṗ)]` with λ bounding the stored energy.
    EnergyModulatedTask {
        #[serde(rename = "kp_n_per_m", with = "row_major")]
        kp: DMatrix<f64>,
        #[serde(rename = "damping_ratio_s", default = "default_damping_ratio")]
        c: f64,
        p0: VirtualTrajectory,
        #[serde(rename = "l_max_j")]
        l_max: f64,
    },
}

/// Energy bookkeeping of the modulated task impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEval {
    pub lambda: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `L_c = T + λ U`.
    pub total: f64,
}

/// Torque of one operator and what it observed.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceEval {
    pub torque: DVector<f64>,
    pub energy: Option<EnergyEval>,
    pub capped: bool,
}

/// `λ = 1` if `T + U ≤ L_max`, else `max((L_max − T) / U, 0)`.
pub fn lambda_from_energies(kinetic: f64, potential: f64, l_max: f64) -> f64 {
    if kinetic + potential <= l_max {
        1.0
    } else if potential < NEGLIGIBLE_POTENTIAL {
        0.0
    } else {
        ((l_max - kinetic) / potential).max(0.0)
    }
}

/// Energy-bounding modulation for the task stiffness `kp` towards `p0`.
pub fn energy_lambda(
    chain: &PlanarChain,
    state: &RobotState,
    kp: &DMatrix<f64>,
    p0: &Vector2<f64>,
    l_max: f64,
) -> Result<EnergyEval> {
    let p = forward_kinematics(chain, &state.q)?;
    let kinetic = kinetic_energy(chain, &state.q, &state.qdot)?;
    energy_at(kinetic, &(p0 - p), kp, l_max)
}

fn energy_at(kinetic: f64, dp: &Vector2<f64>, kp: &DMatrix<f64>, l_max: f64) -> Result<EnergyEval> {
    if !(l_max.is_finite() && l_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "L_max must be > 0, got {l_max}"
        )));
    }
    let d = col(dp);
    let potential = 0.5 * d.dot(&(kp * &d));
    let lambda = lambda_from_energies(kinetic, potential, l_max);
    Ok(EnergyEval {
        lambda,
        kinetic,
        potential,
        total: kinetic + lambda * potential,
    })
}

fn col(v: &Vector2<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn task_vt(p0: &VirtualTrajectory, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim("task virtual trajectory", 2, p0.dim())?;
    let k = p0.eval(t);
    Ok((k.position, k.velocity))
}

/// End-effector quantities shared by all operators at one tick.
struct TaskState {
    j: DMatrix<f64>,
    p: DVector<f64>,
    pdot: DVector<f64>,
    kinetic: Option<f64>,
}

impl TaskState {
    fn new(chain: &PlanarChain, state: &RobotState) -> Result<Self> {
        state.check_for(chain)?;
        let j = jacobian(chain, &state.q)?;
        let p = col(&forward_kinematics(chain, &state.q)?);
        let pdot = &j * &state.qdot;
        Ok(Self {
            j,
            p,
            pdot,
            kinetic: None,
        })
    }
}

impl ImpedanceOp {
    pub fn joint_impedance(
        kq: DMatrix<f64>,
        bq: DMatrix<f64>,
        q0: VirtualTrajectory,
    ) -> Result<Self> {
        let n = kq.nrows();
        let op = Self::JointImpedance { kq, bq, q0 };
        op.validate(n)?;
        Ok(op)
    }

    pub fn task_impedance(
        kp: DMatrix<f64>,
        bp: DMatrix<f64>,
        p0: VirtualTrajectory,
    ) -> Result<Self> {
        let op = Self::TaskImpedance { kp, bp, p0 };
        op.validate(0)?;
        Ok(op)
    }

    pub fn joint_damping(bq: DMatrix<f64>) -> Result<Self> {
        let n = bq.nrows();
        let op = Self::JointDamping { bq };
        op.validate(n)?;
        Ok(op)
    }

    pub fn repulsive_point(k: f64, n_exp: u32, obstacle: Vector2<f64>) -> Result<Self> {
        let op = Self::RepulsivePoint {
            k,
            n_exp,
            obstacle,
            max_force: DEFAULT_REPULSION_CAP,
        };
        op.validate(0)?;
        Ok(op)
    }

    pub fn energy_modulated_task(
        kp: DMatrix<f64>,
        c: f64,
        p0: VirtualTrajectory,
        l_max: f64,
    ) -> Result<Self> {
        let op = Self::EnergyModulatedTask { kp, c, p0, l_max };
        op.validate(0)?;
        Ok(op)
    }

    /// Checks gains and, for joint-space operators, the DOF count `n_links`
    /// (task-space operators ignore it).
    pub fn validate(&self, n_links: usize) -> Result<()> {
        match self {
            Self::JointImpedance { kq, bq, q0 } => {
                validate_gain("Kq", kq, n_links, true)?;
                validate_gain("Bq", bq, n_links, false)?;
                check_dim("joint virtual trajectory", n_links, q0.dim())?;
                q0.validate()
            }
            Self::TaskImpedance { kp, bp, p0 } => {
                validate_gain("Kp", kp, 2, true)?;
                validate_gain("Bp", bp, 2, false)?;
                check_dim("task virtual trajectory", 2, p0.dim())?;
                p0.validate()
            }
            Self::JointDamping { bq } => validate_gain("Bq", bq, n_links, true),
            Self::RepulsivePoint {
                k,
                n_exp,
                obstacle,
                max_force,
            } => {
                if !(k.is_finite() && *k > 0.0) || *n_exp == 0 {
                    return Err(Error::InvalidParameter(
                        "repulsion needs k > 0 and n >= 1".into(),
                    ));
                }
                if !(max_force.is_finite() && *max_force > 0.0) {
                    return Err(Error::InvalidParameter("repulsion cap must be > 0".into()));
                }
                if !(obstacle.x.is_finite() && obstacle.y.is_finite()) {
                    return Err(Error::NonFinite("obstacle position"));
                }
                Ok(())
            }
            Self::EnergyModulatedTask { kp, c, p0, l_max } => {
                validate_gain("Kp", kp, 2, true)?;
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "damping ratio must be > 0, got {c}"
                    )));
                }
                if !(l_max.is_finite() && *l_max > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "L_max must be > 0, got {l_max}"
                    )));
                }
                check_dim("task virtual trajectory", 2, p0.dim())?;
                p0.validate()
            }
        }
    }

    /// The operator's virtual trajectory, if it has one.
    pub fn virtual_trajectory(&self) -> Option<&VirtualTrajectory> {
        match self {
            Self::JointImpedance { q0, .. } => Some(q0),
            Self::TaskImpedance { p0, .. } | Self::EnergyModulatedTask { p0, .. } => Some(p0),
            Self::JointDamping { .. } | Self::RepulsivePoint { .. } => None,
        }
    }

    pub fn virtual_trajectory_mut(&mut self) -> Option<&mut VirtualTrajectory> {
        match self {
            Self::JointImpedance { q0, .. } => Some(q0),
            Self::TaskImpedance { p0, .. } | Self::EnergyModulatedTask { p0, .. } => Some(p0),
            Self::JointDamping { .. } | Self::RepulsivePoint { .. } => None,
        }
    }

    pub fn eval(&self, chain: &PlanarChain, state: &RobotState, t: f64) -> Result<ImpedanceEval> {
        let mut task = TaskState::new(chain, state)?;
        self.eval_with(chain, state, t, &mut task)
    }

    fn eval_with(
        &self,
        chain: &PlanarChain,
        state: &RobotState,
        t: f64,
        task: &mut TaskState,
    ) -> Result<ImpedanceEval> {
        let plain = |torque| ImpedanceEval {
            torque,
            energy: None,
            capped: false,
        };
        match self {
            Self::JointImpedance { kq, bq, q0 } => {
                check_dim("joint impedance DOFs", state.q.len(), kq.nrows())?;
                let k = q0.eval(t);
                Ok(plain(
                    kq * (k.position - &state.q) + bq * (k.velocity - &state.qdot),
                ))
            }
            Self::TaskImpedance { kp, bp, p0 } => {
                let (p_ref, v_ref) = task_vt(p0, t)?;
                let force = kp * (p_ref - &task.p) + bp * (v_ref - &task.pdot);
                Ok(plain(task.j.transpose() * force))
            }
            Self::JointDamping { bq } => {
                check_dim("joint damping DOFs", state.qdot.len(), bq.nrows())?;
                Ok(plain(-(bq * &state.qdot)))
            }
            Self::RepulsivePoint {
                k,
                n_exp,
                obstacle,
                max_force,
            } => {
                let d = col(obstacle) - &task.p;
                let dist = d.norm();
                let (force, capped) = if dist < REPULSION_MIN_DISTANCE {
                    // undefined at the obstacle itself: push along +x at the cap
                    (DVector::from_vec(vec![*max_force, 0.0]), true)
                } else {
                    let f = &d * (-*k / dist.powi(*n_exp as i32));
                    let mag = f.norm();
                    if mag > *max_force {
                        (f * (*max_force / mag), true)
                    } else {
                        (f, false)
                    }
                };
                Ok(ImpedanceEval {
                    torque: task.j.transpose() * force,
                    energy: None,
                    capped,
                })
            }
            Self::EnergyModulatedTask { kp, c, p0, l_max } => {
                let (p_ref, v_ref) = task_vt(p0, t)?;
                let kinetic = match task.kinetic {
                    Some(k) => k,
                    None => {
                        let k = kinetic_energy(chain, &state.q, &state.qdot)?;
                        task.kinetic = Some(k);
                        k
                    }
                };
                let dp = &p_ref - &task.p;
                let energy = energy_at(kinetic, &Vector2::new(dp[0], dp[1]), kp, *l_max)?;
                let stiff = kp * energy.lambda;
                let force = &stiff * dp + &stiff * (v_ref - &task.pdot) * *c;
                Ok(ImpedanceEval {
                    torque: task.j.transpose() * force,
                    energy: Some(energy),
                    capped: false,
                })
            }
        }
    }
}

/// Joint torque contribution of a single operator.
pub fn impedance_force(
    op: &ImpedanceOp,
    chain: &PlanarChain,
    state: &RobotState,
    t: f64,
) -> Result<DVector<f64>> {
    Ok(op.eval(chain, state, t)?.torque)
}

/// Sum of all operator torques; an empty list gives zero torque.
pub fn superpose(
    ops: &[ImpedanceOp],
    chain: &PlanarChain,
    state: &RobotState,
    t: f64,
) -> Result<DVector<f64>> {
    Ok(superpose_eval(ops, chain, state, t)?.torque)
}

fn superpose_eval(
    ops: &[ImpedanceOp],
    chain: &PlanarChain,
    state: &RobotState,
    t: f64,
) -> Result<EdaOutput> {
    let mut task = TaskState::new(chain, state)?;
    let mut out = EdaOutput {
        torque: DVector::zeros(chain.n_links()),
        energy: None,
        repulsion_capped: false,
    };
    for op in ops {
        let ev = op.eval_with(chain, state, t, &mut task)?;
        out.torque += ev.torque;
        out.repulsion_capped |= ev.capped;
        if out.energy.is_none() {
            out.energy = ev.energy;
        }
    }
    Ok(out)
}

/// Per-tick output of an [`EdaController`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdaOutput {
    pub torque: DVector<f64>,
    /// Energy bookkeeping of the first energy-modulated operator, if any.
    pub energy: Option<EnergyEval>,
    pub repulsion_capped: bool,
}

/// Superposition of impedance operators acting on their virtual trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaController {
    pub ops: Vec<ImpedanceOp>,
}

impl EdaController {
    pub fn new(ops: Vec<ImpedanceOp>) -> Self {
        Self { ops }
    }

    pub fn validate(&self, chain: &PlanarChain) -> Result<()> {
        self.ops
            .iter()
            .try_for_each(|op| op.validate(chain.n_links()))
    }

    pub fn output(&self, chain: &PlanarChain, state: &RobotState, t: f64) -> Result<EdaOutput> {
        superpose_eval(&self.ops, chain, state, t)
    }

    pub fn torque(&self, chain: &PlanarChain, state: &RobotState, t: f64) -> Result<DVector<f64>> {
        Ok(self.output(chain, state, t)?.torque)
    }
}
