use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::plain_vector2;

pub const DEFAULT_WALL_STIFFNESS: f64 = 1e4;
pub const DEFAULT_WALL_DAMPING: f64 = 1e2;

/// Half-plane penalty wall acting on the end effector. Points with
/// `normal · p < offset` are penetrating; the wall disappears at `removal_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactWall {
    #[serde(with = "plain_vector2")]
    pub normal: Vector2<f64>,
    #[serde(rename = "offset_m")]
    pub offset: f64,
    #[serde(rename = "stiffness_n_per_m")]
    pub stiffness: f64,
    #[serde(rename = "damping_ns_per_m")]
    pub damping: f64,
    #[serde(rename = "removal_time_s")]
    pub removal_time: f64,
}

impl ContactWall {
    pub fn new(
        normal: Vector2<f64>,
        offset: f64,
        stiffness: f64,
        damping: f64,
        removal_time: f64,
    ) -> Result<Self> {
        let wall = Self {
            normal,
            offset,
            stiffness,
            damping,
            removal_time,
        };
        wall.validate()?;
        Ok(wall)
    }

    /// Wall blocking motion past `y = height` from below, with default gains.
    pub fn ceiling(height: f64, removal_time: f64) -> Self {
        Self {
            normal: Vector2::new(0.0, -1.0),
            offset: -height,
            stiffness: DEFAULT_WALL_STIFFNESS,
            damping: DEFAULT_WALL_DAMPING,
            removal_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !((self.normal.norm() - 1.0).abs() < 1e-9) {
            return Err(Error::InvalidParameter(
                "wall normal must be a unit vector".into(),
            ));
        }
        if !(self.stiffness >= 0.0 && self.damping >= 0.0) {
            return Err(Error::InvalidParameter(
                "wall stiffness and damping must be >= 0".into(),
            ));
        }
        if !(self.offset.is_finite()) || self.removal_time.is_nan() {
            return Err(Error::InvalidParameter(
                "wall offset/removal time must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Penetration depth `offset − normal·p` (positive when in contact).
    pub fn penetration(&self, p: &Vector2<f64>) -> f64 {
        self.offset - self.normal.dot(p)
    }

    /// Signed distance from the wall surface, positive on the free side.
    pub fn clearance(&self, p: &Vector2<f64>) -> f64 {
        -self.penetration(p)
    }
}

/// Penalty contact force on the end effector, never pulling toward the wall.
pub fn wall_contact_force(
    wall: &ContactWall,
    p: &Vector2<f64>,
    pdot: &Vector2<f64>,
    t: f64,
) -> Vector2<f64> {
    if t >= wall.removal_time {
        return Vector2::zeros();
    }
    let depth = wall.penetration(p);
    if depth <= 0.0 {
        return Vector2::zeros();
    }
    let magnitude = (wall.stiffness * depth - wall.damping * wall.normal.dot(pdot)).max(0.0);
    wall.normal * magnitude
}
