use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::plain_vector;

/// Kinematic and inertial description of a planar serial chain of rigid links.
///
/// Link `i` rotates about joint `i`; its center of mass sits `com_offsets[i]`
/// from the proximal joint and `inertias[i]` is taken about that center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarChain {
    masses: Vec<f64>,
    lengths: Vec<f64>,
    com_offsets: Vec<f64>,
    inertias: Vec<f64>,
}

impl PlanarChain {
    pub fn new(
        masses: Vec<f64>,
        lengths: Vec<f64>,
        com_offsets: Vec<f64>,
        inertias: Vec<f64>,
    ) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "chain needs at least one link".into(),
            ));
        }
        check_dim("chain lengths", n, lengths.len())?;
        check_dim("chain com offsets", n, com_offsets.len())?;
        check_dim("chain inertias", n, inertias.len())?;
        for i in 0..n {
            let (m, l, r, inertia) = (masses[i], lengths[i], com_offsets[i], inertias[i]);
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "mass of link {i} must be > 0"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "length of link {i} must be > 0"
                )));
            }
            if !(r.is_finite() && (0.0..=l).contains(&r)) {
                return Err(Error::InvalidParameter(format!(
                    "com offset of link {i} must lie in [0, {l}]"
                )));
            }
            if !(inertia.is_finite() && inertia >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "inertia of link {i} must be >= 0"
                )));
            }
        }
        Ok(Self {
            masses,
            lengths,
            com_offsets,
            inertias,
        })
    }

    /// Chain of uniform slender bars: center of mass at mid-length and
    /// `I = m l² / 12` about it.
    pub fn uniform_bars(masses: &[f64], lengths: &[f64]) -> Result<Self> {
        check_dim("uniform bar lengths", masses.len(), lengths.len())?;
        let com = lengths.iter().map(|l| l / 2.0).collect();
        let inertia = masses
            .iter()
            .zip(lengths)
            .map(|(m, l)| m * l * l / 12.0)
            .collect();
        Self::new(masses.to_vec(), lengths.to_vec(), com, inertia)
    }

    /// `n` identical 1 kg, 1 m slender bars.
    pub fn unit_bars(n: usize) -> Self {
        Self::uniform_bars(&vec![1.0; n], &vec![1.0; n]).expect("unit bars are valid")
    }

    pub fn n_links(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn com_offsets(&self) -> &[f64] {
        &self.com_offsets
    }

    pub fn inertias(&self) -> &[f64] {
        &self.inertias
    }

    pub fn reach(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub(crate) fn check_q(&self, q: &DVector<f64>) -> Result<()> {
        check_dim("joint vector", self.n_links(), q.len())
    }
}

/// Joint positions and velocities at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    #[serde(with = "plain_vector")]
    pub q: DVector<f64>,
    #[serde(with = "plain_vector")]
    pub qdot: DVector<f64>,
    pub t: f64,
}

impl RobotState {
    pub fn new(q: DVector<f64>, qdot: DVector<f64>, t: f64) -> Result<Self> {
        check_dim("state velocity", q.len(), qdot.len())?;
        let state = Self { q, qdot, t };
        state.check_finite()?;
        Ok(state)
    }

    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            qdot: DVector::zeros(n),
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.q.iter().all(|v| v.is_finite())
            && self.qdot.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        check_finite("robot state q", self.q.as_slice())?;
        check_finite("robot state qdot", self.qdot.as_slice())?;
        check_finite("robot state t", &[self.t])
    }

    pub(crate) fn check_for(&self, chain: &PlanarChain) -> Result<()> {
        chain.check_q(&self.q)?;
        check_dim("state velocity", chain.n_links(), self.qdot.len())
    }
}
