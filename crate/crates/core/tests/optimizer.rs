use uav_lifetime::graph::{EdgePolicy, Topology};
use uav_lifetime::harness::{generate_scenario, ScenarioGenConfig};
use uav_lifetime::model::{NodeRole, Position3D, Scenario};
use uav_lifetime::objective::Problem;
use uav_lifetime::optimizer::{
    backhaul_scenario, optimize_stage1, optimize_stage2_backhaul, LeaderMode, OptimizerConfig, StopReason,
};

fn scenario(seed: u64) -> Scenario<f64> {
    generate_scenario(&ScenarioGenConfig { seed, ..Default::default() }).unwrap()
}

fn short() -> OptimizerConfig<f64> {
    OptimizerConfig { max_iterations: 60, ..Default::default() }
}

fn assert_feasible(s: &Scenario<f64>, mode: LeaderMode) {
    let air: Vec<_> = s.nodes.iter().filter(|n| matches!(n.role, NodeRole::GatheringUav | NodeRole::Leader)).collect();
    for (i, a) in air.iter().enumerate() {
        assert!(a.pos.z >= -1e-6);
        for b in &air[i + 1..] {
            assert!(a.pos.distance(&b.pos) >= s.constraints.d_min - 1e-6, "{} {}", a.id, b.id);
        }
    }
    if mode == LeaderMode::Corridor {
        let l = &s.nodes[s.leader_index().unwrap()];
        assert!(l.pos.z >= s.constraints.h_min - 1e-6);
    }
}

#[test]
fn zero_iterations_is_identity() {
    let s = scenario(1);
    let cfg = OptimizerConfig { max_iterations: 0, ..Default::default() };
    let (out, trace) = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Free, &cfg).unwrap();
    assert_eq!(out, s);
    assert_eq!(trace.iterations(), 0);
    assert_eq!(trace.stop, StopReason::MaxIterations);
}

#[test]
fn fixed_leader_never_moves() {
    for seed in 0..3 {
        let s = scenario(seed);
        let (out, _) = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Fixed, &short()).unwrap();
        let l = s.leader_index().unwrap();
        assert_eq!(out.nodes[l].pos, s.nodes[l].pos);
        // terrestrial nodes never move either
        for (a, b) in s.nodes.iter().zip(&out.nodes).filter(|(a, _)| a.role.is_terrestrial()) {
            assert_eq!(a.pos, b.pos);
        }
    }
}

#[test]
fn ascent_is_monotone_and_feasible_in_every_mode() {
    for seed in 0..4 {
        let s = scenario(100 + seed);
        for mode in LeaderMode::ALL {
            let (out, trace) = optimize_stage1(&s, EdgePolicy::TwoHopPaired, mode, &short()).unwrap();
            for w in trace.steps.windows(2) {
                assert!(w[1].lambda2 >= w[0].lambda2 - 1e-12);
            }
            assert!(trace.last().lifetime >= trace.first().lifetime);
            assert_feasible(&out, mode);
        }
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let s = scenario(5);
    let a = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Corridor, &short()).unwrap();
    let b = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Corridor, &short()).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.1.write_csv(&mut ca).unwrap();
    b.1.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn trace_csv_has_one_row_per_node_per_iterate() {
    let s = scenario(6);
    let (_, t) = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Free, &short()).unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + t.steps.len() * 6);
    assert!(text.starts_with("iteration,node,x,y,z,lambda2,lifetime,step\n"));
}

#[test]
fn infeasible_start_is_rejected() {
    let mut s = scenario(7);
    let l = s.leader_index().unwrap();
    s.nodes[l].pos.z = 50.0;
    let err = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Corridor, &short()).unwrap_err();
    assert!(err.to_string().contains("h_min"), "{err}");
    // the same start is fine when the leader is not confined to the corridor
    assert!(optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Free, &short()).is_ok());
}

#[test]
fn backhaul_chain_counts_and_direct_link() {
    let stage1 = scenario(8);
    let bs = Position3D::ground(300.0, 15.0);
    for k in 0..4 {
        let s = backhaul_scenario(&stage1, bs, k).unwrap();
        let g = Problem::backhaul(&stage1).graph(&s).unwrap();
        assert_eq!(g.edges.len(), k + 1);
    }
    let (out, trace) = optimize_stage2_backhaul(&stage1, bs, 0, &Default::default()).unwrap();
    assert_eq!(trace.iterations(), 0);
    assert!(trace.last().lifetime > 0.0);
    assert_eq!(out.count(NodeRole::BackhaulUav), 0);
    assert_eq!(Problem::backhaul(&stage1).topology, Topology::BackhaulChain);
}

#[test]
fn backhaul_improves_and_keeps_the_leader() {
    let stage1 = scenario(9);
    let bs = Position3D::ground(300.0, 15.0);
    let (out, trace) = optimize_stage2_backhaul(&stage1, bs, 2, &short()).unwrap();
    assert!(trace.last().lifetime >= trace.first().lifetime);
    let l = stage1.leader_index().unwrap();
    assert_eq!(out.nodes[0].pos, stage1.nodes[l].pos);
    assert_eq!(out.nodes[out.find("bs").unwrap()].pos, bs);
}

#[test]
fn single_precision_run() {
    let s = generate_scenario(&ScenarioGenConfig::<f32> { seed: 3, ..Default::default() }).unwrap();
    let cfg = OptimizerConfig::<f32> { max_iterations: 20, ..Default::default() };
    let (_, trace) = optimize_stage1(&s, EdgePolicy::TwoHopPaired, LeaderMode::Corridor, &cfg).unwrap();
    assert!(trace.last().lambda2 > trace.first().lambda2);
}
