use std::f64::consts::TAU;

use approx::assert_relative_eq;
use motorprim::dmp::{
    coupling_term, default_basis, imitation_learn, multi_dof_rollout, target_forcing,
    CanonicalSystem, DemoTrajectory, ForcingTerm, LearningConfig, MultiDofDmp, PrimitiveKind,
    TransformationSystem,
};
use motorprim::dmp_control::{dls_pinv, ik_position, pd_feedback, ElbowBranch, PdGains};
use motorprim::dynamics::{
    coriolis_matrix, forward_kinematics, jacobian, mass_matrix, step, ExternalForce, PlanarChain,
    RobotState,
};
use motorprim::eda::{superpose, ImpedanceOp, Oscillation, Submovement, VirtualTrajectory, VtTerm};
use motorprim::linalg::{is_positive_definite, scaled_identity};
use nalgebra::{DMatrix, DVector, Vector2};
use proptest::prelude::*;

fn chain_and_q(max_links: usize) -> impl Strategy<Value = (PlanarChain, DVector<f64>)> {
    (1..=max_links).prop_flat_map(|n| {
        (
            prop::collection::vec(0.2..3.0f64, n),
            prop::collection::vec(0.3..1.5f64, n),
            prop::collection::vec(-3.2..3.2f64, n),
        )
            .prop_map(|(m, l, q)| {
                (
                    PlanarChain::uniform_bars(&m, &l).unwrap(),
                    DVector::from_vec(q),
                )
            })
    })
}

fn vec_of(n: usize, range: std::ops::Range<f64>) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(range, n).prop_map(DVector::from_vec)
}

fn random_spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |a| {
        let a = DMatrix::from_vec(n, n, a);
        &a * a.transpose() + scaled_identity(n, 0.5)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_matrix_is_symmetric_positive_definite((chain, q) in chain_and_q(6)) {
        let m = mass_matrix(&chain, &q).unwrap();
        prop_assert!((&m - m.transpose()).amax() < 1e-12);
        prop_assert!(is_positive_definite(&m));
        prop_assert!(m.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn mdot_minus_two_c_is_skew((chain, q) in chain_and_q(5), seed in prop::collection::vec(-2.0..2.0f64, 10)) {
        let n = chain.n_links();
        let qdot = DVector::from_iterator(n, seed[..n].iter().copied());
        let x = DVector::from_iterator(n, seed[5..5 + n].iter().copied());
        let h = 1e-3;
        let m_at = |s: f64| mass_matrix(&chain, &(&q + &qdot * s)).unwrap();
        let mdot = (m_at(-2.0 * h) - m_at(-h) * 8.0 + m_at(h) * 8.0 - m_at(2.0 * h)) / (12.0 * h);
        let n_mat = mdot - coriolis_matrix(&chain, &q, &qdot).unwrap() * 2.0;
        prop_assert!((x.transpose() * &n_mat * &x)[0].abs() < 1e-9);
    }

    #[test]
    fn jacobian_matches_central_differences((chain, q) in chain_and_q(5)) {
        let j = jacobian(&chain, &q).unwrap();
        let eps = 1e-6;
        for k in 0..chain.n_links() {
            let mut dq = DVector::zeros(chain.n_links());
            dq[k] = eps;
            let d = (forward_kinematics(&chain, &(&q + &dq)).unwrap() - forward_kinematics(&chain, &(&q - &dq)).unwrap())
                / (2.0 * eps);
            prop_assert!((d.x - j[(0, k)]).abs() < 1e-6);
            prop_assert!((d.y - j[(1, k)]).abs() < 1e-6);
        }
    }

    #[test]
    fn step_is_bit_deterministic((chain, q) in chain_and_q(4), tau in -5.0..5.0f64) {
        let n = chain.n_links();
        let s0 = RobotState::new(q, DVector::from_element(n, 0.3), 0.0).unwrap();
        let tau = DVector::from_element(n, tau);
        let ext = ExternalForce::at_end_effector(Vector2::new(1.0, -2.0));
        let a = step(&chain, &s0, &tau, &ext, 1e-3).unwrap();
        let b = step(&chain, &s0, &tau, &ext, 1e-3).unwrap();
        prop_assert_eq!(a.q.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        b.q.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(a.qdot.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        b.qdot.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn canonical_phases(tau in 0.1..5.0f64, alpha in 0.1..10.0f64, t1 in 0.0..20.0f64, dt in 1e-4..1.0f64) {
        let d = CanonicalSystem::discrete(tau, alpha).unwrap();
        let (a, b) = (d.phase(t1), d.phase(t1 + dt));
        prop_assert!(a > 0.0 && b > 0.0 && b < a);
        let r = CanonicalSystem::rhythmic(tau).unwrap();
        let phi = r.phase(t1);
        prop_assert!((0.0..TAU).contains(&phi));
    }

    #[test]
    fn learned_weights_minimize_each_local_cost(goal in -2.0..2.0f64, amp in 0.5..3.0f64, n in 5usize..40) {
        let cs = CanonicalSystem::discrete(1.0, 1.0).unwrap();
        let times: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let demo = DemoTrajectory::sampled(times.clone(), 1, |t| {
            let (y, v, a) = (amp * (3.0 * t).sin() + goal * t * t, 3.0 * amp * (3.0 * t).cos() + 2.0 * goal * t,
                             -9.0 * amp * (3.0 * t).sin() + 2.0 * goal);
            (vec![y], vec![v], vec![a])
        }).unwrap();
        let config = LearningConfig { n_basis: n, ..LearningConfig::default() };
        let learned = imitation_learn(&demo, &cs, &config).unwrap();
        let l = &learned[0];
        let f = target_forcing(demo.position(0), demo.velocity(0), demo.acceleration(0), 1.0, config.alpha_z, config.beta_z, l.goal);
        let s: Vec<f64> = times.iter().map(|t| cs.phase(*t)).collect();
        let scale = l.goal - l.y0;
        for i in 0..n {
            let cost = |w: f64| -> f64 {
                s.iter().zip(&f).map(|(s, f)| l.forcing.basis(i, *s) * (f - w * s * scale).powi(2)).sum()
            };
            let w = l.forcing.weights()[i];
            let h = 1.0 + w.abs();
            let (cm, c0, cp) = (cost(w - h), cost(w), cost(w + h));
            let vertex = w + h * (cm - cp) / (2.0 * (cm - 2.0 * c0 + cp));
            prop_assert!((vertex - w).abs() < 1e-9 * (1.0 + w.abs()), "basis {}: {} vs {}", i, vertex, w);
        }
    }

    #[test]
    fn discrete_rollout_is_spatially_invariant(alpha in 0.2..5.0f64, y0 in -1.0..1.0f64, d in 0.1..2.0f64) {
        let run = |goal: f64| {
            let (c, h) = default_basis(PrimitiveKind::Discrete, 20, 1.0).unwrap();
            let w: Vec<f64> = (0..20).map(|i| 30.0 * ((i as f64) * 0.7).sin()).collect();
            let ft = ForcingTerm::new(PrimitiveKind::Discrete, w, c, h, goal - y0).unwrap();
            let cs = CanonicalSystem::discrete(1.0, 1.0).unwrap();
            let ts = TransformationSystem::critically_damped(10.0, 1.0, goal, y0).unwrap();
            let mut dmp = MultiDofDmp::new(cs, vec![ts], vec![ft]).unwrap();
            multi_dof_rollout(&mut dmp, 2.0, 1e-3).unwrap()
        };
        let base = run(y0 + d);
        let scaled = run(y0 + alpha * d);
        for (a, b) in base.samples.iter().zip(&scaled.samples) {
            prop_assert!(((b.position[0] - y0) - alpha * (a.position[0] - y0)).abs() < 1e-9);
        }
    }

    #[test]
    fn discrete_rollout_is_temporally_invariant(alpha in 0.3..3.0f64) {
        let run = |tau: f64, dt: f64| {
            let (c, h) = default_basis(PrimitiveKind::Discrete, 20, 1.0).unwrap();
            let w: Vec<f64> = (0..20).map(|i| 30.0 * ((i as f64) * 0.7).cos()).collect();
            let ft = ForcingTerm::new(PrimitiveKind::Discrete, w, c, h, 1.0).unwrap();
            let cs = CanonicalSystem::discrete(tau, 1.0).unwrap();
            let ts = TransformationSystem::critically_damped(10.0, tau, 1.0, 0.0).unwrap();
            let mut dmp = MultiDofDmp::new(cs, vec![ts], vec![ft]).unwrap();
            multi_dof_rollout(&mut dmp, 2.0 * tau, dt).unwrap()
        };
        let dt = 1e-4;
        let a = run(1.0, dt);
        let b = run(alpha, alpha * dt);
        prop_assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!((x.position[0] - y.position[0]).abs() < 1e-6);
            prop_assert!((y.t - alpha * x.t).abs() < 1e-9);
        }
    }

    #[test]
    fn coupling_is_orthogonal_to_velocity(p in (-2.0..2.0f64, -2.0..2.0f64), v in (-2.0..2.0f64, -2.0..2.0f64),
                                          gamma in 1.0..500.0f64, beta in 0.1..5.0f64) {
        let (p, pdot, o) = (Vector2::new(p.0, p.1), Vector2::new(v.0, v.1), Vector2::new(0.1, 1.1));
        prop_assume!(pdot.norm() > 1e-3 && (o - p).norm() > 1e-3);
        let c = coupling_term(&p, &pdot, &o, gamma, beta);
        prop_assert!(c.dot(&pdot).abs() < 1e-9 * (1.0 + c.norm() * pdot.norm()));
        let cos = ((o - p).dot(&pdot) / ((o - p).norm() * pdot.norm())).clamp(-1.0, 1.0);
        let theta = cos.acos();
        let expect = gamma * pdot.norm() * theta * (-beta * theta).exp();
        prop_assert!((c.norm() - expect).abs() < 1e-9 * (1.0 + expect));
    }

    #[test]
    fn virtual_trajectories_add(t in -1.0..6.0f64, g in (-2.0..2.0f64, -2.0..2.0f64), w in 0.5..6.0f64) {
        let a = VtTerm::Submovement(Submovement::new(DVector::from_vec(vec![0.1, 0.2]), DVector::from_vec(vec![g.0, g.1]), 1.3, 0.4).unwrap());
        let b = VtTerm::Oscillation(Oscillation::circle(DVector::from_vec(vec![0.0, 1.0]), 0.3, w, 0.2).unwrap());
        let both = VirtualTrajectory::from_terms(2, vec![a.clone(), b.clone()]).unwrap().eval(t);
        let (ka, kb) = (a.eval(t), b.eval(t));
        prop_assert!((both.position - (ka.position + kb.position)).amax() < 1e-15);
        prop_assert!((both.velocity - (ka.velocity + kb.velocity)).amax() < 1e-15);
        prop_assert!((both.acceleration - (ka.acceleration + kb.acceleration)).amax() < 1e-15);
    }

    #[test]
    fn impedance_superposition_is_additive_and_order_free(q in vec_of(3, -2.0..2.0), qd in vec_of(3, -1.0..1.0), t in 0.0..2.0f64) {
        let chain = PlanarChain::unit_bars(3);
        let state = RobotState::new(q, qd, t).unwrap();
        let sm = |g: &[f64]| VirtualTrajectory::submovement(Submovement::new(DVector::zeros(g.len()), DVector::from_column_slice(g), 1.0, 0.0).unwrap());
        let ops = vec![
            ImpedanceOp::joint_impedance(scaled_identity(3, 20.0), scaled_identity(3, 5.0), sm(&[0.5, 0.2, -0.1])).unwrap(),
            ImpedanceOp::task_impedance(scaled_identity(2, 60.0), scaled_identity(2, 20.0), sm(&[1.0, 1.5])).unwrap(),
            ImpedanceOp::joint_damping(scaled_identity(3, 3.0)).unwrap(),
            ImpedanceOp::repulsive_point(0.1, 6, Vector2::new(0.2, 0.9)).unwrap(),
        ];
        let total = superpose(&ops, &chain, &state, t).unwrap();
        let sum = ops.iter().fold(DVector::zeros(3), |acc, op| acc + op.eval(&chain, &state, t).unwrap().torque);
        prop_assert!((&total - &sum).amax() <= 1e-9 * (1.0 + sum.amax()));
        let mut rev = ops.clone();
        rev.reverse();
        let total_rev = superpose(&rev, &chain, &state, t).unwrap();
        prop_assert!((&total - &total_rev).amax() <= 1e-12 * (1.0 + total.amax()));
    }

    #[test]
    fn pd_law_is_the_joint_impedance_law(q in vec_of(2, -2.0..2.0), qd in vec_of(2, -2.0..2.0), t in 0.0..1.5f64,
                                         k in random_spd(2), b in random_spd(2)) {
        let chain = PlanarChain::unit_bars(2);
        let vt = VirtualTrajectory::submovement(Submovement::new(DVector::from_vec(vec![0.1, -0.3]), DVector::from_vec(vec![1.0, 0.7]), 1.0, 0.0).unwrap());
        let ref_k = vt.eval(t);
        let pd = pd_feedback(&PdGains::new(k.clone(), b.clone()).unwrap(), &ref_k.position, &ref_k.velocity, &q, &qd).unwrap();
        let op = ImpedanceOp::joint_impedance(k, b, vt).unwrap();
        let z = op.eval(&chain, &RobotState::new(q, qd, t).unwrap(), t).unwrap().torque;
        prop_assert!((pd - z).amax() < 1e-12);
    }

    #[test]
    fn dls_pinv_is_bounded(a in prop::collection::vec(-2.0..2.0f64, 10), lambda in 1e-3..1.0f64) {
        let j = DMatrix::from_vec(2, 5, a);
        let sv = j.clone().svd(false, false).singular_values;
        let out = dls_pinv(&j, lambda);
        let top = out.svd(false, false).singular_values.max();
        let smin = sv.min();
        prop_assert!(top <= (1.0 / smin).max(1.0 / (2.0 * lambda)) * (1.0 + 1e-12));
        prop_assert!((dls_pinv(&j, lambda * (1.0 + 1e-6)) - dls_pinv(&j, lambda)).amax() < 1e-3);
    }

    #[test]
    fn moore_penrose_identity(a in prop::collection::vec(-2.0..2.0f64, 10)) {
        let j = DMatrix::from_vec(2, 5, a);
        prop_assume!(j.clone().svd(false, false).singular_values.min() > 1e-2);
        let p = dls_pinv(&j, 0.0);
        prop_assert!((&j * &p * &j - &j).amax() < 1e-9);
    }

    #[test]
    fn two_link_ik_round_trips(r in 0.05..1.99f64, phi in -3.1..3.1f64, up in any::<bool>()) {
        let chain = PlanarChain::unit_bars(2);
        let target = Vector2::new(r * phi.cos(), r * phi.sin());
        let branch = if up { ElbowBranch::Up } else { ElbowBranch::Down };
        let q = ik_position(&chain, &target, None, branch).unwrap();
        prop_assert!((forward_kinematics(&chain, &q).unwrap() - target).norm() < 1e-10);
        let on_branch = if up { q[1] <= 1e-12 } else { q[1] >= -1e-12 };
        prop_assert!(on_branch);
    }
}

#[test]
fn unforced_system_settles_to_the_goal() {
    let mut ts = TransformationSystem::critically_damped(10.0, 1.0, 1.0, 0.0).unwrap();
    let rate = ts
        .unforced_eigenvalues()
        .iter()
        .map(|l| l.re.abs())
        .fold(f64::INFINITY, f64::min);
    let dt = 1e-4;
    let steps = (15.0 / rate / dt).round() as usize;
    let mut prev_err = 1.0f64;
    for _ in 0..steps {
        let (y, _) = ts.step(0.0, dt).unwrap();
        assert!(y <= 1.0 + 1e-6);
        assert!((1.0 - y) <= prev_err + 1e-15);
        prev_err = 1.0 - y;
    }
    assert!(prev_err.abs() < 1e-4);
    assert_relative_eq!(rate, 5.0, epsilon = 1e-9);
}
