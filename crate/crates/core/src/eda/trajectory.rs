use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{Kinematics, Oscillation, Submovement};
use crate::error::{check_dim, Result};

/// One additive term of a virtual trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VtTerm {
    Submovement(Submovement),
    Oscillation(Oscillation),
}

impl VtTerm {
    pub fn dim(&self) -> usize {
        match self {
            Self::Submovement(s) => s.dim(),
            Self::Oscillation(o) => o.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Submovement(s) => s.validate(),
            Self::Oscillation(o) => o.validate(),
        }
    }

    pub fn eval(&self, t: f64) -> Kinematics {
        match self {
            Self::Submovement(s) => s.eval(t),
            Self::Oscillation(o) => o.eval(t),
        }
    }

    /// Value the term settles about: a submovement's goal or an oscillation's center.
    pub fn rest_value(&self) -> &DVector<f64> {
        match self {
            Self::Submovement(s) => &s.goal,
            Self::Oscillation(o) => &o.center,
        }
    }
}

/// Ordered sum of submovements and oscillations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualTrajectory {
    dim: usize,
    terms: Vec<VtTerm>,
}

impl VirtualTrajectory {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<VtTerm>) -> Result<Self> {
        let mut vt = Self::new(dim);
        for term in terms {
            vt.push(term)?;
        }
        Ok(vt)
    }

    pub fn submovement(sm: Submovement) -> Self {
        Self {
            dim: sm.dim(),
            terms: vec![VtTerm::Submovement(sm)],
        }
    }

    pub fn push(&mut self, term: VtTerm) -> Result<()> {
        check_dim("virtual trajectory term", self.dim, term.dim())?;
        term.validate()?;
        self.terms.push(term);
        Ok(())
    }

    pub fn with(mut self, term: VtTerm) -> Result<Self> {
        self.push(term)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for term in &self.terms {
            check_dim("virtual trajectory term", self.dim, term.dim())?;
            term.validate()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[VtTerm] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> Kinematics {
        let mut k = Kinematics::zeros(self.dim);
        for term in &self.terms {
            k.accumulate(&term.eval(t));
        }
        k
    }

    /// Sum of the rest values of all terms.
    pub fn rest_value(&self) -> DVector<f64> {
        self.terms
            .iter()
            .fold(DVector::zeros(self.dim), |acc, term| {
                acc + term.rest_value()
            })
    }

    /// Superimposes a zero-start submovement that moves the rest value to `goal`,
    /// leaving all existing terms untouched.
    pub fn redirect(&mut self, goal: &DVector<f64>, duration: f64, onset: f64) -> Result<()> {
        check_dim("redirect goal", self.dim, goal.len())?;
        let offset = goal - self.rest_value();
        let sm = Submovement::new(DVector::zeros(self.dim), offset, duration, onset)?;
        self.push(VtTerm::Submovement(sm))
    }
}
