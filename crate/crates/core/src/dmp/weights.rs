use serde::{Deserialize, Serialize};

use super::{CanonicalSystem, ForcingTerm, PrimitiveKind};
use crate::error::{check_dim, Error, Result};

/// One DOF of a weight file. A file is a JSON array of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub kind: PrimitiveKind,
    pub tau: f64,
    pub alpha_z: f64,
    pub beta_z: f64,
    pub alpha_s: Option<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub weights: Vec<f64>,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
}

impl WeightRecord {
    pub fn from_forcing(
        forcing: &ForcingTerm,
        cs: &CanonicalSystem,
        alpha_z: f64,
        beta_z: f64,
    ) -> Self {
        Self {
            kind: forcing.kind(),
            tau: cs.tau(),
            alpha_z,
            beta_z,
            alpha_s: (cs.kind() == PrimitiveKind::Discrete).then_some(cs.alpha_s()),
            n: forcing.n_basis(),
            weights: forcing.weights().to_vec(),
            centers: forcing.centers().to_vec(),
            widths: forcing.widths().to_vec(),
            scale: forcing.scale(),
            goal: None,
            y0: None,
        }
    }

    pub fn with_anchors(mut self, goal: f64, y0: f64) -> Self {
        self.goal = Some(goal);
        self.y0 = Some(y0);
        self
    }

    pub fn canonical(&self) -> Result<CanonicalSystem> {
        match self.kind {
            PrimitiveKind::Discrete => {
                let alpha_s = self.alpha_s.ok_or_else(|| {
                    Error::InvalidParameter("discrete record lacks alpha_s".into())
                })?;
                CanonicalSystem::discrete(self.tau, alpha_s)
            }
            PrimitiveKind::Rhythmic => CanonicalSystem::rhythmic(self.tau),
        }
    }

    pub fn forcing(&self) -> Result<ForcingTerm> {
        check_dim("weight record N", self.n, self.weights.len())?;
        ForcingTerm::new(
            self.kind,
            self.weights.clone(),
            self.centers.clone(),
            self.widths.clone(),
            self.scale,
        )
    }
}

pub fn write_weights(records: &[WeightRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn read_weights(json: &str) -> Result<Vec<WeightRecord>> {
    let records: Vec<WeightRecord> =
        serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
    for r in &records {
        r.forcing()?;
        r.canonical()?;
    }
    Ok(records)
}
