#![allow(dead_code)]

use handsoff::matexp::build_constraint_matrix;
use handsoff::LtiSystem;
use rand::Rng;

pub fn harmonic_oscillator() -> LtiSystem {
    LtiSystem::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]], &[0.0, 1.0], Some("oscillator".into())).unwrap()
}

pub fn triple_integrator() -> LtiSystem {
    LtiSystem::from_rows(
        &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]],
        &[0.0, 0.0, 1.0],
        None,
    )
    .unwrap()
}

pub fn stable_scalar() -> LtiSystem {
    LtiSystem::from_rows(&[vec![-1.0]], &[1.0], None).unwrap()
}

/// An initial state reachable by construction: `ξ = -G u` for a random admissible `u`.
pub fn reachable_state(sys: &LtiSystem, horizon: f64, n_intervals: usize, rng: &mut impl Rng) -> Vec<f64> {
    let g = build_constraint_matrix(sys, horizon, n_intervals).unwrap();
    let u: Vec<f64> = (0..n_intervals).map(|_| rng.gen_range(-0.6..0.6)).collect();
    g.apply(&u).iter().map(|v| -v).collect()
}

/// A double-integrator state in the non-normal region with pulse `[t1, t1 + w)`.
pub fn nonnormal_state(t1: f64, width: f64) -> [f64; 2] {
    let c = t1 + width / 2.0;
    [c * width, -width]
}
