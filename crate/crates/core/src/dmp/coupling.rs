use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

/// Direction of the 90° rotation applied to the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRotation {
    #[default]
    Counterclockwise,
    Clockwise,
}

impl CouplingRotation {
    pub fn matrix(self) -> Matrix2<f64> {
        match self {
            Self::Counterclockwise => Matrix2::new(0.0, -1.0, 1.0, 0.0),
            Self::Clockwise => Matrix2::new(0.0, 1.0, -1.0, 0.0),
        }
    }
}

const DEGENERATE_NORM: f64 = 1e-9;

/// `γ R ṗ θ exp(−β θ)` with the counterclockwise rotation, where `θ` is the
/// angle between `o − p` and `ṗ`. Zero when either vector is degenerate.
pub fn coupling_term(
    p: &Vector2<f64>,
    pdot: &Vector2<f64>,
    o: &Vector2<f64>,
    gamma: f64,
    beta: f64,
) -> Vector2<f64> {
    coupling_term_rotated(p, pdot, o, gamma, beta, CouplingRotation::Counterclockwise)
        .unwrap_or_else(Vector2::zeros)
}

/// As [`coupling_term`] with an explicit rotation; `None` flags a degenerate angle.
pub fn coupling_term_rotated(
    p: &Vector2<f64>,
    pdot: &Vector2<f64>,
    o: &Vector2<f64>,
    gamma: f64,
    beta: f64,
    rotation: CouplingRotation,
) -> Option<Vector2<f64>> {
    let to_obstacle = o - p;
    let (nv, no) = (pdot.norm(), to_obstacle.norm());
    if nv < DEGENERATE_NORM || no < DEGENERATE_NORM {
        return None;
    }
    let cos = (to_obstacle.dot(pdot) / (nv * no)).clamp(-1.0, 1.0);
    let theta = cos.acos();
    Some(rotation.matrix() * pdot * (gamma * theta * (-beta * theta).exp()))
}

/// Point-obstacle coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleCoupling {
    #[serde(with = "crate::linalg::plain_vector2")]
    pub obstacle: Vector2<f64>,
    pub gamma: f64,
    pub beta: f64,
    #[serde(default)]
    pub rotation: CouplingRotation,
}

impl ObstacleCoupling {
    pub fn eval(&self, p: &Vector2<f64>, pdot: &Vector2<f64>) -> Option<Vector2<f64>> {
        coupling_term_rotated(
            p,
            pdot,
            &self.obstacle,
            self.gamma,
            self.beta,
            self.rotation,
        )
    }
}
