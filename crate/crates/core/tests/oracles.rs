use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use motorprim::dmp::{coupling_term, GoalFilter};
use motorprim::dmp_control::{
    inverse_dynamics_torque, sliding_mode_torque, DlsPolicy, SlidingModeGains,
};
use motorprim::dynamics::{
    end_effector_velocity, forward_kinematics, jacobian, kinetic_energy, mass_matrix, step,
    wall_contact_force, ContactWall, ExternalForce, PlanarChain, RobotState,
};
use motorprim::eda::{lambda_from_energies, min_jerk, Submovement};
use nalgebra::{DVector, Vector2};

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

#[test]
fn passive_chain_conserves_energy() {
    for n in [2, 3, 5] {
        let chain = PlanarChain::unit_bars(n);
        let q = DVector::from_fn(n, |i, _| 0.3 * i as f64 - 0.2);
        let qdot = DVector::from_fn(n, |i, _| 1.0 - 0.4 * i as f64);
        let mut s = RobotState::new(q, qdot, 0.0).unwrap();
        let e0 = kinetic_energy(&chain, &s.q, &s.qdot).unwrap();
        let zero = DVector::zeros(n);
        for _ in 0..10_000 {
            s = step(&chain, &s, &zero, &ExternalForce::none(), 1e-4).unwrap();
        }
        let e1 = kinetic_energy(&chain, &s.q, &s.qdot).unwrap();
        assert!(((e1 - e0) / e0).abs() < 1e-3, "n={n}: {e0} -> {e1}");
    }
}

#[test]
fn constant_torque_on_one_link() {
    let chain = PlanarChain::unit_bars(1);
    let inertia = 1.0 / 3.0;
    let (tau, dt) = (0.7, 1e-4);
    let mut s = RobotState::at_rest(v(&[0.2]));
    for _ in 0..10_000 {
        s = step(&chain, &s, &v(&[tau]), &ExternalForce::none(), dt).unwrap();
    }
    let exact = 0.2 + 0.5 * tau / inertia;
    assert!((s.q[0] - exact).abs() < 5.0 * dt * tau / inertia);
}

#[test]
fn mass_matrix_matches_lagrangian_hessian() {
    let chain = PlanarChain::unit_bars(2);
    let q = v(&[0.4, 0.0]);
    let m = mass_matrix(&chain, &q).unwrap();
    let h = 1e-3;
    let ke = |a: f64, b: f64| kinetic_energy(&chain, &q, &v(&[a, b])).unwrap();
    let d00 = (ke(h, 0.0) - 2.0 * ke(0.0, 0.0) + ke(-h, 0.0)) / (h * h);
    let d01 = (ke(h, h) - ke(h, -h) - ke(-h, h) + ke(-h, -h)) / (4.0 * h * h);
    assert_relative_eq!(m[(0, 0)], d00, epsilon = 1e-8);
    assert_relative_eq!(m[(0, 1)], d01, epsilon = 1e-8);
    // m1 (l/2)² + I1 + m2 (l² + (l/2)² + l·l) + I2 at q2 = 0
    assert_relative_eq!(
        m[(0, 0)],
        0.25 + 1.0 / 12.0 + 1.0 + 0.25 + 1.0 + 1.0 / 12.0,
        epsilon = 1e-12
    );
}

#[test]
fn model_matched_feedforward_tracks_the_plan() {
    let chain = PlanarChain::unit_bars(2);
    let sm = Submovement::new(v(&[0.0, 0.0]), v(&[1.0, 1.0]), 1.0, 0.0).unwrap();
    let dt = 1e-4;
    let mut s = RobotState::at_rest(v(&[0.0, 0.0]));
    let mut sq = 0.0;
    let steps = 10_000;
    for k in 0..steps {
        let t = k as f64 * dt;
        let r = sm.eval(t);
        sq += (&s.q - &r.position).norm_squared();
        let tau =
            inverse_dynamics_torque(&chain, &r.position, &r.velocity, &r.acceleration).unwrap();
        s = step(&chain, &s, &tau, &ExternalForce::none(), dt).unwrap();
    }
    let rms = (sq / steps as f64).sqrt();
    assert!(rms < 1e-3, "rms {rms}");
}

#[test]
fn single_link_inverse_dynamics() {
    let chain = PlanarChain::unit_bars(1);
    let tau = inverse_dynamics_torque(&chain, &v(&[0.3]), &v(&[0.0]), &v(&[2.0])).unwrap();
    assert_relative_eq!(tau[0], 2.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn goal_filter_matches_closed_form() {
    let (alpha, tau, dt) = (1.0, 1.0, 1e-4);
    let mut gf = GoalFilter::new(alpha, tau, -0.7).unwrap();
    gf.set_target(0.8);
    for k in 1..=50_000 {
        let g = gf.step(dt).unwrap();
        let t = k as f64 * dt;
        assert!((g - GoalFilter::closed_form(alpha, tau, -0.7, 0.8, t)).abs() < 1e-6);
        let direct = 0.8 + (-0.7 - 0.8) * (-alpha * t / tau).exp();
        assert!((g - direct).abs() < 1e-6);
    }
}

#[test]
fn min_jerk_peak_velocity() {
    let sm = Submovement::new(v(&[0.0, 0.52]), v(&[0.0, 1.72]), 1.0, 0.0).unwrap();
    let peak = sm.eval(0.5).velocity.norm();
    assert_relative_eq!(peak, 1.875 * 1.2, epsilon = 1e-12);
    let (f, df, ddf) = min_jerk(0.5);
    assert_relative_eq!(f, 0.5, epsilon = 1e-15);
    assert_relative_eq!(df, 1.875, epsilon = 1e-15);
    assert_relative_eq!(ddf, 0.0, epsilon = 1e-12);
}

#[test]
fn coupling_magnitude_at_right_angle() {
    let (p, pdot, o) = (
        Vector2::new(0.0, 0.0),
        Vector2::new(0.0, 2.0),
        Vector2::new(1.0, 0.0),
    );
    let c = coupling_term(&p, &pdot, &o, 300.0, 3.0);
    assert_relative_eq!(
        c.norm(),
        300.0 * 2.0 * FRAC_PI_2 * (-3.0 * FRAC_PI_2).exp(),
        epsilon = 1e-9
    );
    assert!(c.dot(&pdot).abs() < 1e-12);
}

#[test]
fn wall_penalty_force() {
    let wall = ContactWall::new(Vector2::new(0.0, -1.0), -1.0, 1e4, 0.0, f64::INFINITY).unwrap();
    let f = wall_contact_force(&wall, &Vector2::new(0.0, 1.01), &Vector2::zeros(), 0.0);
    assert_relative_eq!(f.y, -100.0, epsilon = 1e-9);
    assert_relative_eq!(f.x, 0.0);
}

#[test]
fn energy_modulation_factor() {
    assert_relative_eq!(lambda_from_energies(2.0, 1.0, 2.5), 0.5, epsilon = 1e-15);
    assert_eq!(lambda_from_energies(1.0, 1.0, 2.5), 1.0);
}

#[test]
fn sliding_mode_holds_an_on_plan_state() {
    let chain = PlanarChain::unit_bars(5);
    let sm = Submovement::new(v(&[0.0, 3.0]), v(&[3.0, 3.0]), 2.0, 0.0).unwrap();
    let gains = SlidingModeGains::diagonal(5, 80.0, 100.0).unwrap();
    let policy = DlsPolicy::default();
    let q0 = v(&[0.341, 0.518, 0.67, 0.745, 0.72]);
    let p0 = forward_kinematics(&chain, &q0).unwrap();
    let offset = p0 - Vector2::new(0.0, 3.0);
    let dt = 1e-4;
    let mut s = RobotState::at_rest(q0);
    for k in 0..1000 {
        let t = k as f64 * dt;
        let r = sm.eval(t);
        let pd = Vector2::new(r.position[0], r.position[1]) + offset;
        let vd = Vector2::new(r.velocity[0], r.velocity[1]);
        let ad = Vector2::new(r.acceleration[0], r.acceleration[1]);
        let tau = sliding_mode_torque(&chain, &gains, &s, &pd, &vd, &ad, &policy).unwrap();
        s = step(&chain, &s, &tau, &ExternalForce::none(), dt).unwrap();
        let err = (forward_kinematics(&chain, &s.q).unwrap() - pd).norm();
        assert!(err < 1e-4, "t={t}: {err}");
    }
}

#[test]
fn end_effector_velocity_is_jacobian_times_qdot() {
    let chain = PlanarChain::unit_bars(3);
    let q = v(&[0.3, -PI / 3.0, 1.1]);
    let qd = v(&[0.5, 0.2, -0.7]);
    let j = jacobian(&chain, &q).unwrap();
    let jv = &j * &qd;
    let ev = end_effector_velocity(&chain, &q, &qd).unwrap();
    assert_relative_eq!(ev.x, jv[0], epsilon = 1e-14);
    assert_relative_eq!(ev.y, jv[1], epsilon = 1e-14);
}
