//! Projected gradient ascent on the algebraic connectivity.
//!
//! Each iteration normalizes the `lambda2` gradient to unit infinity norm,
//! steps the movable nodes, projects onto the altitude and separation
//! constraints, and halves the step until `lambda2` does not decrease.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::{eigenvalue_gradient, lambda2_gradient, min_norm_combination, PlacementGradient};
use crate::graph::EdgePolicy;
use crate::model::{Constraints, Node, NodeRole, Position3D, Scenario};
use crate::objective::{Evaluation, Problem};
use crate::scalar::Scalar;
use crate::spectral::nontrivial_spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaderMode {
    /// Leader stays where it is.
    Fixed,
    /// Leader moves but keeps `z >= h_min`.
    Corridor,
    /// Leader moves anywhere above ground.
    Free,
}

impl LeaderMode {
    pub const ALL: [LeaderMode; 3] = [LeaderMode::Fixed, LeaderMode::Corridor, LeaderMode::Free];

    pub fn name(self) -> &'static str {
        match self {
            LeaderMode::Fixed => "fixed",
            LeaderMode::Corridor => "corridor",
            LeaderMode::Free => "free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Initial step per iteration, m (gradient is normalized to infinity norm 1).
    pub step_size: T,
    /// Step shrink factor on a rejected trial, in (0, 1).
    pub backtrack: T,
    pub max_iterations: usize,
    /// Stop once the gradient infinity norm falls to this value.
    pub grad_tol: T,
    /// Backtracking gives up below this step, m.
    pub min_step: T,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            step_size: T::one(),
            backtrack: T::of(0.5),
            max_iterations: 500,
            grad_tol: T::of(1e-6),
            min_step: T::of(1e-4),
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check(&self) -> Result<()> {
        let positive = [("step_size", self.step_size), ("grad_tol", self.grad_tol), ("min_step", self.min_step)];
        for (name, v) in positive {
            if !(v > T::zero()) {
                return Err(Error::Config(format!("optimizer.{name} must be > 0, got {v}")));
            }
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) {
            return Err(Error::Config(format!("optimizer.backtrack must be in (0, 1), got {}", self.backtrack)));
        }
        Ok(())
    }
}

/// Slack allowed when checking a starting placement, m.
pub const FEASIBILITY_TOL: f64 = 1e-6;
const SEPARATION_SLACK: f64 = 1e-9;
const MAX_PROJECTION_SWEEPS: usize = 100;

/// Which nodes the projection may move and which must stay apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec {
    pub movable: Vec<usize>,
    /// Nodes that keep `d_min` between each other. Immovable members act as anchors.
    pub separated: Vec<usize>,
    /// Leader index, clamped to the corridor in `Corridor` mode.
    pub leader: Option<usize>,
    pub mode: LeaderMode,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProjectionReport {
    pub clamps: usize,
    pub separations: usize,
    pub converged: bool,
}

impl ProjectionReport {
    pub fn events(&self) -> usize {
        self.clamps + self.separations
    }
}

/// Enforces ground clearance, the leader corridor and pairwise separation in place.
pub fn project_constraints<T: Scalar>(
    nodes: &mut [Node<T>],
    spec: &ProjectionSpec,
    constraints: &Constraints<T>,
) -> ProjectionReport {
    let mut report = ProjectionReport::default();
    let movable = |i: usize| spec.movable.contains(&i);
    let target = constraints.d_min;
    let trigger = target - T::of(SEPARATION_SLACK);

    for _ in 0..MAX_PROJECTION_SWEEPS {
        let mut changed = clamp(nodes, spec, constraints, &mut report);
        for a in 0..spec.separated.len() {
            for b in a + 1..spec.separated.len() {
                let (i, j) = (spec.separated[a], spec.separated[b]);
                let (mi, mj) = (movable(i), movable(j));
                if !mi && !mj {
                    continue;
                }
                let (pi, pj) = (nodes[i].pos, nodes[j].pos);
                let d = pi.distance(&pj);
                if d >= trigger {
                    continue;
                }
                let dir = if d > T::zero() { (pj - pi) * d.recip() } else { pair_direction(i, j) };
                match (mi, mj) {
                    (true, true) => {
                        let mid = (pi + pj) * T::of(0.5);
                        let half = target * T::of(0.5);
                        nodes[i].pos = mid - dir * half;
                        nodes[j].pos = mid + dir * half;
                    }
                    (true, false) => nodes[i].pos = pj - dir * target,
                    _ => nodes[j].pos = pi + dir * target,
                }
                report.separations += 1;
                changed = true;
            }
        }
        if !changed {
            report.converged = true;
            return report;
        }
    }
    report
}

fn clamp<T: Scalar>(
    nodes: &mut [Node<T>],
    spec: &ProjectionSpec,
    constraints: &Constraints<T>,
    report: &mut ProjectionReport,
) -> bool {
    let mut changed = false;
    for &i in &spec.movable {
        let floor =
            if Some(i) == spec.leader && spec.mode == LeaderMode::Corridor { constraints.h_min } else { T::zero() };
        if nodes[i].pos.z < floor {
            nodes[i].pos.z = floor;
            report.clamps += 1;
            changed = true;
        }
    }
    changed
}

// Deterministic direction for separating two coincident nodes.
fn pair_direction<T: Scalar>(i: usize, j: usize) -> Position3D<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(((i as u64) << 32) | j as u64);
    loop {
        let v = Position3D::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n: f64 = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v.map(|c| T::of(c / n));
        }
    }
}

/// Reason an ascent run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Gradient norm reached `grad_tol`.
    Converged,
    /// Ran out of iterations; not an error.
    MaxIterations,
    /// Backtracking fell below `min_step` without an acceptable trial.
    StepExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    pub iteration: usize,
    /// Positions of `OptimizerTrace::movable`, same order.
    pub positions: Vec<Position3D<T>>,
    pub lambda2: T,
    pub lifetime: T,
    /// Gradient infinity norm at these positions.
    pub grad_norm: T,
    /// Step that produced this iterate; zero for the start.
    pub step: T,
    /// Eigenvalues whose gradients formed the step direction: 1 for the
    /// plain Fiedler gradient, more at a crossing.
    pub cluster: usize,
    pub projection: ProjectionReport,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace<T> {
    /// Scenario indices of the movable nodes.
    pub movable: Vec<usize>,
    pub ids: Vec<String>,
    pub steps: Vec<TraceStep<T>>,
    pub stop: StopReason,
    /// Final lifetime fell below the initial one although `lambda2` rose.
    pub surrogate_gap: bool,
    /// The final projection did not converge within its sweep budget.
    pub projection_nonconverged: bool,
}

impl<T: Scalar> OptimizerTrace<T> {
    /// Accepted iterations, excluding the starting point.
    pub fn iterations(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn first(&self) -> &TraceStep<T> {
        &self.steps[0]
    }

    pub fn last(&self) -> &TraceStep<T> {
        self.steps.last().expect("trace starts with the initial state")
    }

    pub fn degenerate_iterations(&self) -> usize {
        self.steps.iter().filter(|s| s.degenerate).count()
    }

    /// `iteration,node,x,y,z,lambda2,lifetime,step`, one row per movable node per iterate.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,node,x,y,z,lambda2,lifetime,step")?;
        for s in &self.steps {
            for (id, p) in self.ids.iter().zip(&s.positions) {
                writeln!(
                    out,
                    "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    s.iteration,
                    id,
                    p.x.as_f64(),
                    p.y.as_f64(),
                    p.z.as_f64(),
                    s.lambda2.as_f64(),
                    s.lifetime.as_f64(),
                    s.step.as_f64()
                )?;
            }
        }
        Ok(())
    }
}

/// Checks a starting placement against the projection constraints.
pub fn check_feasible<T: Scalar>(nodes: &[Node<T>], spec: &ProjectionSpec, constraints: &Constraints<T>) -> Result<()> {
    let tol = T::of(FEASIBILITY_TOL);
    for &i in &spec.movable {
        if nodes[i].pos.z < -tol {
            return Err(Error::InfeasibleStart(format!("{} is below ground (z = {})", nodes[i].id, nodes[i].pos.z)));
        }
    }
    if let Some(l) = spec.leader {
        if spec.mode != LeaderMode::Free && nodes[l].pos.z < constraints.h_min - tol {
            return Err(Error::InfeasibleStart(format!(
                "h_min: leader {} at z = {} is below the corridor floor {}",
                nodes[l].id, nodes[l].pos.z, constraints.h_min
            )));
        }
    }
    for a in 0..spec.separated.len() {
        for b in a + 1..spec.separated.len() {
            let (i, j) = (spec.separated[a], spec.separated[b]);
            let d = nodes[i].pos.distance(&nodes[j].pos);
            if d < constraints.d_min - tol {
                return Err(Error::InfeasibleStart(format!(
                    "d_min: {} and {} are {} m apart, below {}",
                    nodes[i].id, nodes[j].id, d, constraints.d_min
                )));
            }
        }
    }
    Ok(())
}

/// Projected ascent of `lambda2` over `projection.movable`.
pub fn optimize<T: Scalar>(
    scenario: &Scenario<T>,
    problem: &Problem<T>,
    projection: &ProjectionSpec,
    config: &OptimizerConfig<T>,
) -> Result<(Scenario<T>, OptimizerTrace<T>)> {
    config.check()?;
    check_feasible(&scenario.nodes, projection, &scenario.constraints)?;

    let movable = &projection.movable;
    let snapshot = |s: &Scenario<T>| movable.iter().map(|&m| s.nodes[m].pos).collect::<Vec<_>>();
    let gradient =
        |s: &Scenario<T>, e: &Evaluation<T>| lambda2_gradient(s, &e.graph, &e.spectral, movable, &problem.ctx);

    let mut state = scenario.clone();
    let mut eval = problem.evaluate(&state)?;
    let mut grad: PlacementGradient<T> = gradient(&state, &eval)?;
    let mut steps = vec![TraceStep {
        iteration: 0,
        positions: snapshot(&state),
        lambda2: eval.lambda2(),
        lifetime: eval.lifetime,
        grad_norm: grad.inf_norm(),
        step: T::zero(),
        cluster: 0,
        projection: ProjectionReport { converged: true, ..Default::default() },
        degenerate: eval.spectral.degenerate,
    }];

    let mut projection_nonconverged = false;
    let mut next_step = config.step_size;
    let stop = loop {
        let gnorm = grad.inf_norm();
        if gnorm <= config.grad_tol {
            break StopReason::Converged;
        }
        if steps.len() > config.max_iterations {
            break StopReason::MaxIterations;
        }
        let mut search = |direction: &PlacementGradient<T>, step: T| {
            line_search(
                &state,
                eval.lambda2(),
                direction,
                step,
                problem,
                projection,
                config,
                &mut projection_nonconverged,
            )
        };
        let mut accepted = search(&grad, next_step).map(|a| (a, 1));
        if accepted.is_none() {
            accepted = cluster_search(&state, &eval, problem, movable, config, &mut search)?;
        }
        let Some(((trial, e, step, report), cluster)) = accepted else {
            break StopReason::StepExhausted;
        };
        next_step = (step + step).min(config.step_size);
        grad = gradient(&trial, &e)?;
        state = trial;
        eval = e;
        steps.push(TraceStep {
            iteration: steps.len(),
            positions: snapshot(&state),
            lambda2: eval.lambda2(),
            lifetime: eval.lifetime,
            grad_norm: grad.inf_norm(),
            step,
            cluster,
            projection: report,
            degenerate: eval.spectral.degenerate,
        });
    };

    let surrogate_gap = steps.last().map(|s| s.lifetime).unwrap_or(T::zero()) < steps[0].lifetime;
    let ids = movable.iter().map(|&m| state.nodes[m].id.clone()).collect();
    let trace = OptimizerTrace { movable: movable.clone(), ids, steps, stop, surrogate_gap, projection_nonconverged };
    Ok((state, trace))
}

type Accepted<T> = (Scenario<T>, Evaluation<T>, T, ProjectionReport);

// Backtracks from `step` along `direction` (normalized to unit infinity norm)
// until the projected point does not lower lambda2.
#[allow(clippy::too_many_arguments)]
fn line_search<T: Scalar>(
    state: &Scenario<T>,
    lambda2: T,
    direction: &PlacementGradient<T>,
    mut step: T,
    problem: &Problem<T>,
    projection: &ProjectionSpec,
    config: &OptimizerConfig<T>,
    nonconverged: &mut bool,
) -> Option<Accepted<T>> {
    let dnorm = direction.inf_norm();
    if dnorm == T::zero() {
        return None;
    }
    while step >= config.min_step {
        let mut trial = state.clone();
        for &m in &projection.movable {
            let g = direction.partials[m];
            let p = &mut trial.nodes[m].pos;
            p.x = p.x + step * g[0] / dnorm;
            p.y = p.y + step * g[1] / dnorm;
            p.z = p.z + step * g[2] / dnorm;
        }
        let report = project_constraints(&mut trial.nodes, projection, &trial.constraints);
        if report.converged {
            if let Ok(e) = problem.evaluate(&trial) {
                if e.lambda2() >= lambda2 {
                    return Some((trial, e, step, report));
                }
            }
        } else {
            *nonconverged = true;
        }
        step = step * config.backtrack;
    }
    None
}

/// Largest eigenvalue cluster tried when the Fiedler gradient stalls.
pub const MAX_CLUSTER: usize = 4;

// At a crossing of lambda2 with the eigenvalues above it, the Fiedler
// gradient raises one branch and lowers another. Retry along the min-norm
// combination of the lowest `k` eigenvalue gradients for growing `k`.
fn cluster_search<T: Scalar, F>(
    state: &Scenario<T>,
    eval: &Evaluation<T>,
    problem: &Problem<T>,
    movable: &[usize],
    config: &OptimizerConfig<T>,
    search: &mut F,
) -> Result<Option<(Accepted<T>, usize)>>
where
    F: FnMut(&PlacementGradient<T>, T) -> Option<Accepted<T>>,
{
    let spectrum = nontrivial_spectrum(&eval.graph.weighted_laplacian, &eval.graph.node_weights)?;
    let mut grads = Vec::new();
    for v in spectrum.vectors.iter().take(MAX_CLUSTER) {
        grads.push(eigenvalue_gradient(state, &eval.graph, v, movable, &problem.ctx)?);
        if grads.len() < 2 {
            continue;
        }
        let direction = min_norm_combination(&grads);
        if direction.inf_norm() <= config.grad_tol {
            return Ok(None);
        }
        if let Some(a) = search(&direction, config.step_size) {
            return Ok(Some((a, grads.len())));
        }
    }
    Ok(None)
}

/// Stage-1 projection: gathering UAVs always move, the leader unless `Fixed`.
pub fn stage1_projection<T: Scalar>(scenario: &Scenario<T>, mode: LeaderMode) -> Result<ProjectionSpec> {
    let leader = scenario.leader_index().ok_or(Error::MissingRole("leader"))?;
    let uavs = scenario.indices_of(NodeRole::GatheringUav);
    let mut movable = uavs.clone();
    if mode != LeaderMode::Fixed {
        movable.push(leader);
    }
    let mut separated = uavs;
    separated.push(leader);
    Ok(ProjectionSpec { movable, separated, leader: Some(leader), mode })
}

/// Jointly places the gathering UAVs and (unless `Fixed`) the leader.
pub fn optimize_stage1<T: Scalar>(
    scenario: &Scenario<T>,
    policy: EdgePolicy,
    mode: LeaderMode,
    config: &OptimizerConfig<T>,
) -> Result<(Scenario<T>, OptimizerTrace<T>)> {
    let projection = stage1_projection(scenario, mode)?;
    let problem = Problem::gathering(scenario, policy);
    optimize(scenario, &problem, &projection, config)
}

/// The backhaul network: stage-1 leader, `relays` UAVs evenly spaced on the
/// leader-BS segment, the base station and the stage-1 jammers.
pub fn backhaul_scenario<T: Scalar>(stage1: &Scenario<T>, bs: Position3D<T>, relays: usize) -> Result<Scenario<T>> {
    let leader = stage1.leader_index().ok_or(Error::MissingRole("leader"))?;
    let lpos = stage1.nodes[leader].pos;
    let mut nodes = vec![stage1.nodes[leader].clone()];
    for k in 0..relays {
        let t = T::of_usize(k + 1) / T::of_usize(relays + 1);
        nodes.push(Node::new(format!("relay{k}"), NodeRole::BackhaulUav, lpos + (bs - lpos) * t));
    }
    nodes.push(Node::new("bs", NodeRole::BaseStation, bs));
    nodes.extend(stage1.nodes.iter().filter(|n| n.role == NodeRole::Jammer).cloned());
    Ok(Scenario { nodes, channel: stage1.channel, energy: stage1.energy, constraints: stage1.constraints })
}

/// Second stage: with the leader frozen, places `relays` backhaul UAVs on the
/// chain leader -> relays -> BS. Links carry `N * R`.
pub fn optimize_stage2_backhaul<T: Scalar>(
    stage1: &Scenario<T>,
    bs: Position3D<T>,
    relays: usize,
    config: &OptimizerConfig<T>,
) -> Result<(Scenario<T>, OptimizerTrace<T>)> {
    let scenario = backhaul_scenario(stage1, bs, relays)?;
    let relays_idx = scenario.indices_of(NodeRole::BackhaulUav);
    let mut separated = vec![0];
    separated.extend(&relays_idx);
    let projection = ProjectionSpec { movable: relays_idx, separated, leader: Some(0), mode: LeaderMode::Fixed };
    let problem = Problem::backhaul(stage1);
    optimize(&scenario, &problem, &projection, config)
}
