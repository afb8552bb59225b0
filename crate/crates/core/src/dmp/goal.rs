use crate::error::{Error, Result};

/// First-order goal filter `τ ġ = α_g (g0 − g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalFilter {
    pub alpha_g: f64,
    pub tau: f64,
    pub g: f64,
    pub g0: f64,
}

impl GoalFilter {
    pub fn new(alpha_g: f64, tau: f64, g: f64) -> Result<Self> {
        positive("alpha_g", alpha_g)?;
        positive("tau", tau)?;
        Ok(Self {
            alpha_g,
            tau,
            g,
            g0: g,
        })
    }

    pub fn set_target(&mut self, g0: f64) {
        self.g0 = g0;
    }

    /// Advances by `dt` using the exact solution of the linear filter over the
    /// step, so a piecewise-constant `g0` yields the closed form to rounding.
    pub fn step(&mut self, dt: f64) -> Result<f64> {
        positive("dt", dt)?;
        let decay = (-self.alpha_g * dt / self.tau).exp();
        self.g = self.g0 + (self.g - self.g0) * decay;
        Ok(self.g)
    }

    /// `g(t) = g_new + (g_old − g_new) exp(−α_g t / τ)`.
    pub fn closed_form(alpha_g: f64, tau: f64, g_old: f64, g_new: f64, t: f64) -> f64 {
        g_new + (g_old - g_new) * (-alpha_g * t / tau).exp()
    }
}

/// Critically damped second-order goal system `τ ġ = v`, `τ v̇ = α (β (g0 − g) − v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderGoal {
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    pub v: f64,
    pub g0: f64,
}

impl SecondOrderGoal {
    pub fn new(tau: f64, alpha: f64, beta: f64, g: f64) -> Result<Self> {
        positive("tau", tau)?;
        positive("alpha", alpha)?;
        positive("beta", beta)?;
        Ok(Self {
            tau,
            alpha,
            beta,
            g,
            v: 0.0,
            g0: g,
        })
    }

    pub fn set_target(&mut self, g0: f64) {
        self.g0 = g0;
    }

    pub fn step(&mut self, dt: f64) -> Result<f64> {
        positive("dt", dt)?;
        let vdot = self.alpha * (self.beta * (self.g0 - self.g) - self.v) / self.tau;
        self.g += self.v / self.tau * dt;
        self.v += vdot * dt;
        Ok(self.g)
    }
}

/// How a transformation system's goal evolves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoalDynamics {
    Fixed(f64),
    FirstOrder(GoalFilter),
    SecondOrder(SecondOrderGoal),
}

impl GoalDynamics {
    pub fn value(&self) -> f64 {
        match self {
            Self::Fixed(g) => *g,
            Self::FirstOrder(f) => f.g,
            Self::SecondOrder(s) => s.g,
        }
    }

    pub fn target(&self) -> f64 {
        match self {
            Self::Fixed(g) => *g,
            Self::FirstOrder(f) => f.g0,
            Self::SecondOrder(s) => s.g0,
        }
    }

    /// A fixed goal jumps to the new target immediately.
    pub fn set_target(&mut self, g0: f64) {
        match self {
            Self::Fixed(g) => *g = g0,
            Self::FirstOrder(f) => f.set_target(g0),
            Self::SecondOrder(s) => s.set_target(g0),
        }
    }

    pub fn step(&mut self, dt: f64) -> Result<f64> {
        match self {
            Self::Fixed(g) => Ok(*g),
            Self::FirstOrder(f) => f.step(dt),
            Self::SecondOrder(s) => s.step(dt),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point() {
        let mut gf = GoalFilter::new(1.0, 1.0, 0.4).unwrap();
        for _ in 0..10 {
            assert_eq!(gf.step(1e-3).unwrap(), 0.4);
        }
    }

    #[test]
    fn matches_closed_form() {
        let mut gf = GoalFilter::new(1.0, 1.0, 0.0).unwrap();
        gf.set_target(1.0);
        let dt = 1e-4;
        for k in 1..=10_000 {
            gf.step(dt).unwrap();
            let exact = GoalFilter::closed_form(1.0, 1.0, 0.0, 1.0, k as f64 * dt);
            assert!((gf.g - exact).abs() < 1e-6);
        }
        assert!((gf.g - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn second_order_settles() {
        let mut sg = SecondOrderGoal::new(1.0, 10.0, 2.5, 0.0).unwrap();
        sg.set_target(2.0);
        for _ in 0..5000 {
            sg.step(1e-3).unwrap();
            assert!(sg.g <= 2.0 + 1e-9);
        }
        assert!((sg.g - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fixed_goal_jumps() {
        let mut g = GoalDynamics::Fixed(1.0);
        g.set_target(3.0);
        assert_eq!(g.step(1e-3).unwrap(), 3.0);
    }
}
