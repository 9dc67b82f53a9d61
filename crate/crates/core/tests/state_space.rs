mod support;

use ccilc::{closed_loop, simulate, LtvStateSpace};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use support::*;

#[test]
fn simulation_equals_lifted_product() {
    let mut rng = rng(201);
    for _ in 0..20 {
        let n = rng.random_range(1..=40);
        let ltv = rng.random_bool(0.5);
        let sys = random_system(&mut rng, n, ltv, false);
        let u = rand_signal(&mut rng, n, 2, 1.0);
        let y = simulate(&sys, &u, None).unwrap().to_lifted();
        let expect = oracle_lifted(&sys) * u.to_lifted();
        assert!(rel_sup(&y, &expect) <= 1e-12);
    }
}

#[test]
fn simulation_is_linear() {
    let mut rng = rng(203);
    for _ in 0..10 {
        let n = rng.random_range(1..=30);
        let sys = random_system(&mut rng, n, true, false);
        let (u, v) = (
            rand_signal(&mut rng, n, 2, 1.0),
            rand_signal(&mut rng, n, 2, 1.0),
        );
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let lhs = simulate(&sys, &u.scale(a).add(&v.scale(b)).unwrap(), None).unwrap();
        let rhs = simulate(&sys, &u, None)
            .unwrap()
            .scale(a)
            .add(&simulate(&sys, &v, None).unwrap().scale(b))
            .unwrap();
        assert!(rel_sup(&lhs.to_lifted(), &rhs.to_lifted()) <= 1e-12);
    }
}

fn small_system(rng: &mut TestRng, n: usize, n_x: usize, d_scale: f64) -> LtvStateSpace {
    let a = randn(rng, n_x, n_x);
    let a = if n_x > 0 {
        let s = a.singular_values().max();
        a * (0.8 / s.max(0.8))
    } else {
        a
    };
    LtvStateSpace::lti(
        a,
        randn(rng, n_x, 2),
        randn(rng, 2, n_x),
        randn(rng, 2, 2) * d_scale,
        n,
    )
    .unwrap()
}

#[test]
fn closed_loop_matches_lifted_algebra() {
    // with lifted P and C: J = (I + P C)^-1 P, S = (I + P C)^-1
    let mut rng = rng(205);
    for case in 0..20 {
        let n = rng.random_range(1..=25);
        let np = rng.random_range(0..=3);
        let nc = rng.random_range(0..=2);
        let plant = small_system(&mut rng, n, np, 0.3);
        let controller = small_system(&mut rng, n, nc, 0.3);
        let (j, s) = closed_loop(&plant, &controller).unwrap();
        let (p, c) = (oracle_lifted(&plant), oracle_lifted(&controller));
        let sens = (DMatrix::identity(2 * n, 2 * n) + &p * &c)
            .try_inverse()
            .unwrap();
        let j_expect = &sens * &p;
        let (j_got, s_got) = (oracle_lifted(&j), oracle_lifted(&s));
        let tol = 1e-10 * (1.0 + j_expect.amax());
        assert!((j_got - j_expect).amax() <= tol, "case {case}: J");
        assert!(
            (s_got - &sens).amax() <= 1e-10 * (1.0 + sens.amax()),
            "case {case}: S"
        );
    }
}

#[test]
fn initial_state_response_superposes() {
    let mut rng = rng(207);
    let sys = random_system(&mut rng, 15, true, false);
    let u = rand_signal(&mut rng, 15, 2, 1.0);
    let x0 = DVector::from_fn(sys.n_x(), |i, _| i as f64 - 1.0);
    let both = simulate(&sys, &u, Some(&x0)).unwrap();
    let free = simulate(&sys, &ccilc::Signal::zeros(15, 2), Some(&x0)).unwrap();
    let forced = simulate(&sys, &u, None).unwrap();
    let sum = free.add(&forced).unwrap();
    assert!(rel_sup(&both.to_lifted(), &sum.to_lifted()) <= 1e-12);
}
