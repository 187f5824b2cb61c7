mod common;

use handsoff::lp::{self, LpStatus};
use handsoff::lti::DEFAULT_ZERO_TOL;
use handsoff::pmp::find_certificate;
use handsoff::solver::{self, transcribe, TranscribedProblem, BANG_TOL};
use handsoff::LtiSystem;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn systems() -> Vec<LtiSystem> {
    vec![
        LtiSystem::double_integrator(),
        common::harmonic_oscillator(),
        common::stable_scalar(),
        LtiSystem::scalar_integrator(),
        common::triple_integrator(),
    ]
}

fn check_problem(problem: &TranscribedProblem) {
    let delta = problem.delta();
    let l1 = solver::solve_l1(problem).unwrap();
    let sparse = solver::solve_max_handsoff(problem).unwrap();
    let v1 = solver::value(problem).unwrap();

    for u in [&l1.control, &sparse.control] {
        assert!(problem.residual(u.values()) <= solver::FEASIBILITY_TOL * (1.0 + problem.xi().amax()));
        assert!(u.linf_norm() <= 1.0 + BANG_TOL);
    }
    // value equality and the inclusion of sparse controls among L1-optimal ones;
    // each of the at most n fractional cells can add up to Δ of support
    let slack = problem.system().n().max(2) as f64 * delta;
    assert!((sparse.l0_value - v1).abs() <= 1e-6 + slack, "{} vs {v1}", sparse.l0_value);
    assert!((sparse.control.l1_norm() - v1).abs() <= 1e-8 * (1.0 + v1));
    assert!((l1.l1_value - v1).abs() <= 1e-9 * (1.0 + v1));
    assert!(l1.vertex_fractional_count <= problem.system().n());
    assert!(sparse.l0_value >= v1 - 1e-9, "support cannot undercut the L1 optimum when |u| ≤ 1");
}

#[test]
fn random_reachable_states_on_several_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sys in systems() {
        for &(horizon, n) in &[(3.0, 120), (5.0, 250)] {
            for _ in 0..4 {
                let xi = common::reachable_state(&sys, horizon, n, &mut rng);
                let problem = transcribe(&sys, &xi, horizon, n).unwrap();
                check_problem(&problem);
            }
        }
    }
}

#[test]
fn refinement_never_increases_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sys in systems() {
        for _ in 0..3 {
            let xi = common::reachable_state(&sys, 4.0, 50, &mut rng);
            let mut prev = f64::INFINITY;
            for n in [50, 100, 200, 400] {
                let v = solver::value(&transcribe(&sys, &xi, 4.0, n).unwrap()).unwrap();
                assert!(v <= prev + 1e-8, "{} at N={n} after {prev}", v);
                prev = v;
            }
        }
    }
}

#[test]
fn midpoint_convexity_of_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for sys in systems() {
        for _ in 0..5 {
            let xi = common::reachable_state(&sys, 3.0, 150, &mut rng);
            let eta = common::reachable_state(&sys, 3.0, 150, &mut rng);
            let mid: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
            let v = |x: &[f64]| solver::value(&transcribe(&sys, x, 3.0, 150).unwrap()).unwrap();
            assert!(v(&mid) <= 0.5 * v(&xi) + 0.5 * v(&eta) + 1e-8);
        }
    }
}

#[test]
fn solver_outputs_are_certified_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for sys in [LtiSystem::double_integrator(), common::harmonic_oscillator()] {
        for _ in 0..4 {
            let xi = common::reachable_state(&sys, 5.0, 200, &mut rng);
            let problem = transcribe(&sys, &xi, 5.0, 200).unwrap();
            let a = solver::solve_max_handsoff(&problem).unwrap();
            let b = solver::solve_max_handsoff(&problem).unwrap();
            assert_eq!(a, b);
            let cert = find_certificate(&problem, &a.control).unwrap().expect("certificate");
            assert!(cert.max_violation <= 1e-6);
            let rw = solver::solve_reweighted_lp(&problem, 0.5, 20, 1e-4).unwrap();
            assert!((rw.l0_value - a.l0_value).abs() <= 2.0 * problem.delta());
            assert!(find_certificate(&problem, &rw.control).unwrap().is_some());
        }
    }
}

#[test]
fn unreachable_and_trivial_states() {
    let sys = LtiSystem::scalar_integrator();
    let problem = transcribe(&sys, &[1.5], 1.0, 100).unwrap();
    assert!(!problem.is_reachable().unwrap());
    assert!(solver::solve_max_handsoff(&problem).unwrap_err().to_string().contains("not reachable"));
    let zero = transcribe(&LtiSystem::double_integrator(), &[0.0, 0.0], 5.0, 100).unwrap();
    let r = solver::solve_max_handsoff(&zero).unwrap();
    assert!(r.control.values().iter().all(|&v| v == 0.0));
    assert_eq!(r.control.l0_norm(DEFAULT_ZERO_TOL), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_vertex_is_basic(seed in 0u64..10_000, n in 40usize..160) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = common::harmonic_oscillator();
        let xi = common::reachable_state(&sys, 4.0, n, &mut rng);
        let problem = transcribe(&sys, &xi, 4.0, n).unwrap();
        let g = problem.constraint().matrix();
        // Plain split LP, independent of the solver's tie-break and polish.
        let mut a = nalgebra::DMatrix::zeros(2, 2 * n);
        a.view_mut((0, 0), (2, n)).copy_from(g);
        a.view_mut((0, n), (2, n)).copy_from(&(-g));
        let lp = lp::LinearProgram::new(
            vec![problem.delta(); 2 * n],
            a,
            problem.rhs().iter().copied().collect(),
            vec![0.0; 2 * n],
            vec![1.0; 2 * n],
        ).unwrap();
        let sol = lp::solve(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(sol.interior_count(&lp, 1e-9) <= 2);
        prop_assert!((sol.objective - sol.dual_objective(&lp)).abs() <= 1e-8 * (1.0 + sol.objective.abs()));
        let v = solver::value(&problem).unwrap();
        prop_assert!((v - sol.objective).abs() <= 1e-9 * (1.0 + v));
    }

    #[test]
    fn sparse_solution_is_l1_optimal(seed in 0u64..10_000, horizon in 2.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = LtiSystem::double_integrator();
        let xi = common::reachable_state(&sys, horizon, 100, &mut rng);
        check_problem(&transcribe(&sys, &xi, horizon, 100).unwrap());
    }
}
