use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{
    CanonicalSystem, ForcingTerm, GoalDynamics, LearnedPrimitive, ObstacleCoupling, PrimitiveKind,
    TransformationSystem,
};
use crate::error::{check_dim, Error, Result};

/// Counts of guarded divisions encountered while stepping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub degenerate_forcing: usize,
    pub degenerate_coupling: usize,
}

/// Planned position, velocity and acceleration at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSample {
    pub t: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
}

/// Several transformation systems driven by one canonical system.
#[derive(Debug, Clone)]
pub struct MultiDofDmp {
    canonical: CanonicalSystem,
    systems: Vec<TransformationSystem>,
    forcing: Vec<ForcingTerm>,
    goals: Vec<GoalDynamics>,
    coupling: Option<ObstacleCoupling>,
    anchors: Option<Vec<f64>>,
    t: f64,
    diagnostics: Diagnostics,
}

impl MultiDofDmp {
    pub fn new(
        canonical: CanonicalSystem,
        systems: Vec<TransformationSystem>,
        forcing: Vec<ForcingTerm>,
    ) -> Result<Self> {
        if systems.is_empty() {
            return Err(Error::InvalidParameter("DMP needs at least one DOF".into()));
        }
        check_dim("forcing terms", systems.len(), forcing.len())?;
        for ts in &systems {
            if ts.tau != canonical.tau() {
                return Err(Error::InvalidParameter(format!(
                    "transformation tau {} differs from canonical tau {}",
                    ts.tau,
                    canonical.tau()
                )));
            }
        }
        if forcing.iter().any(|f| f.kind() != canonical.kind()) {
            return Err(Error::InvalidParameter(
                "forcing kind differs from canonical kind".into(),
            ));
        }
        let goals = systems
            .iter()
            .map(|ts| GoalDynamics::Fixed(ts.goal))
            .collect();
        Ok(Self {
            canonical,
            systems,
            forcing,
            goals,
            coupling: None,
            anchors: None,
            t: 0.0,
            diagnostics: Diagnostics::default(),
        })
    }

    /// Starts each DOF at its demonstrated initial position and velocity.
    pub fn from_learned(
        canonical: CanonicalSystem,
        alpha_z: f64,
        beta_z: f64,
        learned: &[LearnedPrimitive],
    ) -> Result<Self> {
        let tau = canonical.tau();
        let systems = learned
            .iter()
            .map(|l| TransformationSystem::new(alpha_z, beta_z, tau, l.goal, l.y0, tau * l.ydot0))
            .collect::<Result<Vec<_>>>()?;
        let forcing = learned.iter().map(|l| l.forcing.clone()).collect();
        Self::new(canonical, systems, forcing)
    }

    pub fn with_goal_dynamics(mut self, goals: Vec<GoalDynamics>) -> Result<Self> {
        check_dim("goal dynamics", self.systems.len(), goals.len())?;
        for (ts, g) in self.systems.iter_mut().zip(&goals) {
            ts.goal = g.value();
        }
        self.goals = goals;
        Ok(self)
    }

    /// Adds the planar obstacle coupling term; requires exactly two DOFs.
    pub fn with_coupling(mut self, coupling: ObstacleCoupling) -> Result<Self> {
        check_dim("coupled DMP DOFs", 2, self.systems.len())?;
        self.coupling = Some(coupling);
        Ok(self)
    }

    /// Rescales each discrete forcing term to `g(t) − y0` as the goal moves.
    pub fn with_goal_scaling(mut self, y0: Vec<f64>) -> Result<Self> {
        check_dim("forcing anchors", self.systems.len(), y0.len())?;
        if self.canonical.kind() != PrimitiveKind::Discrete {
            return Err(Error::InvalidParameter(
                "goal scaling applies to discrete primitives".into(),
            ));
        }
        self.anchors = Some(y0);
        Ok(self)
    }

    pub fn n_dof(&self) -> usize {
        self.systems.len()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn canonical(&self) -> &CanonicalSystem {
        &self.canonical
    }

    pub fn systems(&self) -> &[TransformationSystem] {
        &self.systems
    }

    pub fn forcing(&self) -> &[ForcingTerm] {
        &self.forcing
    }

    pub fn goals(&self) -> Vec<f64> {
        self.goals.iter().map(GoalDynamics::value).collect()
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    /// Commands a new goal; how the transformation goal follows depends on the goal dynamics.
    pub fn set_goal_target(&mut self, target: &[f64]) -> Result<()> {
        check_dim("goal target", self.systems.len(), target.len())?;
        for ((g, ts), &g0) in self.goals.iter_mut().zip(&mut self.systems).zip(target) {
            g.set_target(g0);
            ts.goal = g.value();
        }
        Ok(())
    }

    fn inputs(&self) -> (Vec<f64>, usize, bool) {
        let s = self.canonical.phase(self.t);
        let mut degenerate = 0;
        let mut inputs: Vec<f64> = self
            .forcing
            .iter()
            .zip(&self.systems)
            .enumerate()
            .map(|(d, (ft, ts))| {
                let ev = match &self.anchors {
                    Some(y0) => ft.with_scale(ts.goal - y0[d]).eval(s),
                    None => ft.eval(s),
                };
                degenerate += usize::from(ev.degenerate);
                ev.value
            })
            .collect();
        let mut coupling_degenerate = false;
        if let Some(c) = &self.coupling {
            let p = Vector2::new(self.systems[0].y, self.systems[1].y);
            let v = Vector2::new(self.systems[0].velocity(), self.systems[1].velocity());
            match c.eval(&p, &v) {
                Some(ct) => {
                    inputs[0] += ct.x;
                    inputs[1] += ct.y;
                }
                None => coupling_degenerate = true,
            }
        }
        (inputs, degenerate, coupling_degenerate)
    }

    /// Current plan without advancing.
    pub fn sample(&self) -> PlanSample {
        let (inputs, _, _) = self.inputs();
        PlanSample {
            t: self.t,
            position: self.systems.iter().map(|ts| ts.y).collect(),
            velocity: self
                .systems
                .iter()
                .map(TransformationSystem::velocity)
                .collect(),
            acceleration: self
                .systems
                .iter()
                .zip(&inputs)
                .map(|(ts, &f)| ts.acceleration(f))
                .collect(),
        }
    }

    /// One explicit Euler step of all DOFs and their goal dynamics.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let (inputs, degenerate, coupling_degenerate) = self.inputs();
        self.diagnostics.degenerate_forcing += degenerate;
        self.diagnostics.degenerate_coupling += usize::from(coupling_degenerate);
        for (ts, &f) in self.systems.iter_mut().zip(&inputs) {
            ts.step(f, dt)?;
        }
        for (g, ts) in self.goals.iter_mut().zip(&mut self.systems) {
            ts.goal = g.step(dt)?;
        }
        self.t += dt;
        Ok(())
    }
}

/// Time-indexed output of [`multi_dof_rollout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    pub samples: Vec<PlanSample>,
}

impl Rollout {
    /// Linear interpolation of the planned position of one DOF.
    pub fn position_at(&self, dof: usize, t: f64) -> f64 {
        let samples = &self.samples;
        let first = &samples[0];
        if t <= first.t {
            return first.position[dof];
        }
        let idx = samples.partition_point(|s| s.t <= t);
        if idx >= samples.len() {
            return samples[samples.len() - 1].position[dof];
        }
        let (a, b) = (&samples[idx - 1], &samples[idx]);
        let w = (t - a.t) / (b.t - a.t);
        a.position[dof] + w * (b.position[dof] - a.position[dof])
    }
}

/// Integrates a DMP for `duration` seconds, sampling before every step and at the end.
pub fn multi_dof_rollout(dmp: &mut MultiDofDmp, duration: f64, dt: f64) -> Result<Rollout> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration must be >= 0, got {duration}"
        )));
    }
    let steps = (duration / dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(dmp.sample());
    for _ in 0..steps {
        dmp.advance(dt)?;
        samples.push(dmp.sample());
    }
    Ok(Rollout { samples })
}
