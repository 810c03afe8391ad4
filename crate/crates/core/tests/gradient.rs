mod common;

use common::{oracle_spectrum, oracle_weighted_laplacian};
use uav_lifetime::gradient::{compare_gradients, fd_gradient_oracle, lambda2_gradient};
use uav_lifetime::graph::EdgePolicy;
use uav_lifetime::harness::{generate_scenario, ScenarioGenConfig};
use uav_lifetime::model::{Axis, Position3D};
use uav_lifetime::objective::Problem;
use uav_lifetime::optimizer::{backhaul_scenario, stage1_projection, LeaderMode};

#[test]
fn every_policy_matches_central_differences() {
    for policy in [EdgePolicy::TwoHopPaired, EdgePolicy::TwoHopNearest, EdgePolicy::Full] {
        for seed in 0..10 {
            let s = generate_scenario(&ScenarioGenConfig::<f64> { seed: 500 + seed, ..Default::default() }).unwrap();
            let p = Problem::gathering(&s, policy);
            let movable = stage1_projection(&s, LeaderMode::Free).unwrap().movable;
            let e = p.evaluate(&s).unwrap();
            let a = lambda2_gradient(&s, &e.graph, &e.spectral, &movable, &p.ctx).unwrap();
            let fd = fd_gradient_oracle(&s, &p, &movable, 1e-4).unwrap();
            assert!(fd.reliable);
            let c = compare_gradients(&a, &fd.gradient);
            assert!(c.passes(), "{policy:?} seed {seed}: {c:?}");
        }
    }
}

// Central differences of lambda2 where lambda2 comes from nalgebra applied to the
// symmetrized adjacency, not from this crate's eigensolver.
#[test]
fn matches_differences_of_an_independent_eigensolver() {
    let s = generate_scenario(&ScenarioGenConfig::<f64> { seed: 77, ..Default::default() }).unwrap();
    let p = Problem::gathering(&s, EdgePolicy::TwoHopPaired);
    let movable = stage1_projection(&s, LeaderMode::Free).unwrap().movable;
    let e = p.evaluate(&s).unwrap();
    let a = lambda2_gradient(&s, &e.graph, &e.spectral, &movable, &p.ctx).unwrap();
    let lambda2 = |sc: &uav_lifetime::Scenario| {
        let g = p.graph(sc).unwrap();
        oracle_spectrum(&oracle_weighted_laplacian(&g.symmetric, &g.node_weights))[1]
    };
    let h = 1e-4;
    for &m in &movable {
        for axis in Axis::ALL {
            let mut up = s.clone();
            *up.nodes[m].pos.coord_mut(axis) += h;
            let mut down = s.clone();
            *down.nodes[m].pos.coord_mut(axis) -= h;
            let fd = (lambda2(&up) - lambda2(&down)) / (2.0 * h);
            let got = a.get(m, axis);
            assert!((got - fd).abs() <= (1e-4 * fd.abs()).max(1e-8), "node {m} {axis:?}: {got} vs {fd}");
        }
    }
}

#[test]
fn backhaul_chain_matches_central_differences() {
    let stage1 = generate_scenario(&ScenarioGenConfig::<f64> { seed: 9, ..Default::default() }).unwrap();
    for relays in 1..=3 {
        let s = backhaul_scenario(&stage1, Position3D::ground(250.0, 30.0), relays).unwrap();
        let mut s = s;
        // lift relays off the straight segment so no coordinate sits at a symmetric point
        for (k, n) in s.nodes.iter_mut().enumerate().filter(|(_, n)| n.id.starts_with("relay")) {
            n.pos.y += 3.0 * k as f64;
        }
        let p = Problem::backhaul(&stage1);
        let movable: Vec<usize> = (1..=relays).collect();
        let e = p.evaluate(&s).unwrap();
        let a = lambda2_gradient(&s, &e.graph, &e.spectral, &movable, &p.ctx).unwrap();
        let fd = fd_gradient_oracle(&s, &p, &movable, 1e-4).unwrap();
        let c = compare_gradients(&a, &fd.gradient);
        assert!(c.passes(), "{relays} relays: {c:?}");
    }
}
