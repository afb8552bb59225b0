use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::plain_vector;

/// Position, velocity and acceleration of a kinematic primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub position: DVector<f64>,
    pub velocity: DVector<f64>,
    pub acceleration: DVector<f64>,
}

impl Kinematics {
    pub fn zeros(dim: usize) -> Self {
        Self {
            position: DVector::zeros(dim),
            velocity: DVector::zeros(dim),
            acceleration: DVector::zeros(dim),
        }
    }

    pub fn accumulate(&mut self, other: &Kinematics) {
        self.position += &other.position;
        self.velocity += &other.velocity;
        self.acceleration += &other.acceleration;
    }
}

/// Minimum-jerk shape `10s³ − 15s⁴ + 6s⁵` and its first two derivatives in `s`.
pub fn min_jerk(s: f64) -> (f64, f64, f64) {
    let s = s.clamp(0.0, 1.0);
    let (s2, s3) = (s * s, s * s * s);
    (
        s3 * (10.0 - 15.0 * s + 6.0 * s2),
        30.0 * s2 * (1.0 - s).powi(2),
        60.0 * s * (1.0 - 3.0 * s + 2.0 * s2),
    )
}

/// Minimum-jerk point-to-point motion from `start` to `goal` over `[onset, onset + duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submovement {
    #[serde(with = "plain_vector")]
    pub start: DVector<f64>,
    #[serde(with = "plain_vector")]
    pub goal: DVector<f64>,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "onset_s", default)]
    pub onset: f64,
}

impl Submovement {
    pub fn new(start: DVector<f64>, goal: DVector<f64>, duration: f64, onset: f64) -> Result<Self> {
        let sm = Self {
            start,
            goal,
            duration,
            onset,
        };
        sm.validate()?;
        Ok(sm)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("submovement goal", self.start.len(), self.goal.len())?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "submovement duration must be > 0, got {}",
                self.duration
            )));
        }
        if !(self.onset.is_finite() && self.onset >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "submovement onset must be >= 0, got {}",
                self.onset
            )));
        }
        if self
            .start
            .iter()
            .chain(self.goal.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("submovement endpoints"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn end_time(&self) -> f64 {
        self.onset + self.duration
    }

    pub fn eval(&self, t: f64) -> Kinematics {
        let delta = &self.goal - &self.start;
        let u = (t - self.onset) / self.duration;
        if u <= 0.0 {
            return Kinematics {
                position: self.start.clone(),
                ..Kinematics::zeros(self.dim())
            };
        }
        if u >= 1.0 {
            return Kinematics {
                position: self.goal.clone(),
                ..Kinematics::zeros(self.dim())
            };
        }
        let (f, df, ddf) = min_jerk(u);
        Kinematics {
            position: &self.start + &delta * f,
            velocity: &delta * (df / self.duration),
            acceleration: &delta * (ddf / (self.duration * self.duration)),
        }
    }
}

/// Periodic shape of an [`Oscillation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OscillationShape {
    /// `A sin(ω t + φ)` per DOF.
    SinusoidPerDof {
        #[serde(with = "plain_vector")]
        amplitude: DVector<f64>,
    },
    /// `r [cos(ω t + φ), sin(ω t + φ)]` in the plane.
    Circle {
        #[serde(rename = "radius_m")]
        radius: f64,
    },
}

/// Periodic kinematic primitive about `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    #[serde(with = "plain_vector")]
    pub center: DVector<f64>,
    pub shape: OscillationShape,
    #[serde(rename = "omega_rad_per_s")]
    pub omega: f64,
    #[serde(rename = "phase_rad", default)]
    pub phase: f64,
}

impl Oscillation {
    pub fn sinusoid(
        center: DVector<f64>,
        amplitude: DVector<f64>,
        omega: f64,
        phase: f64,
    ) -> Result<Self> {
        let os = Self {
            center,
            shape: OscillationShape::SinusoidPerDof { amplitude },
            omega,
            phase,
        };
        os.validate()?;
        Ok(os)
    }

    pub fn circle(center: DVector<f64>, radius: f64, omega: f64, phase: f64) -> Result<Self> {
        let os = Self {
            center,
            shape: OscillationShape::Circle { radius },
            omega,
            phase,
        };
        os.validate()?;
        Ok(os)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "oscillation frequency must be > 0, got {}",
                self.omega
            )));
        }
        match &self.shape {
            OscillationShape::SinusoidPerDof { amplitude } => {
                check_dim("oscillation amplitude", self.center.len(), amplitude.len())
            }
            OscillationShape::Circle { radius } => {
                check_dim("circle center", 2, self.center.len())?;
                if radius.is_finite() && *radius >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "circle radius must be >= 0, got {radius}"
                    )))
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    pub fn eval(&self, t: f64) -> Kinematics {
        let w = self.omega;
        let arg = w * t + self.phase;
        let (s, c) = arg.sin_cos();
        match &self.shape {
            OscillationShape::SinusoidPerDof { amplitude } => Kinematics {
                position: &self.center + amplitude * s,
                velocity: amplitude * (w * c),
                acceleration: amplitude * (-w * w * s),
            },
            OscillationShape::Circle { radius } => {
                let r = *radius;
                Kinematics {
                    position: &self.center + DVector::from_vec(vec![r * c, r * s]),
                    velocity: DVector::from_vec(vec![-r * w * s, r * w * c]),
                    acceleration: DVector::from_vec(vec![-r * w * w * c, -r * w * w * s]),
                }
            }
        }
    }
}
