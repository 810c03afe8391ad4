//! Random scenarios, the middle-plane baseline and the Monte Carlo comparison
//! of leader modes.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gradient::{compare_gradients, fd_gradient_oracle, lambda2_gradient, GRADIENT_REL_TOL};
use crate::graph::EdgePolicy;
use crate::model::{ChannelParams, Constraints, EnergyParams, Node, NodeRole, Position3D, Scenario};
use crate::objective::Problem;
use crate::optimizer::{optimize_stage1, stage1_projection, LeaderMode, OptimizerConfig, StopReason};
use crate::scalar::Scalar;

/// Axis-aligned rectangle in the ground plane, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region<T> {
    pub x: (T, T),
    pub y: (T, T),
}

impl<T: Scalar> Default for Region<T> {
    fn default() -> Self {
        Self { x: (T::zero(), T::of(100.0)), y: (T::of(-10.0), T::of(40.0)) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGenConfig<T> {
    pub region: Region<T>,
    pub uavs: usize,
    pub cluster_heads: usize,
    pub jammers: usize,
    /// Initial UAV altitudes are drawn uniformly from this band, m.
    pub altitude_band: (T, T),
    pub seed: u64,
    pub channel: ChannelParams<T>,
    pub energy: EnergyParams<T>,
    pub constraints: Constraints<T>,
}

impl<T: Scalar> Default for ScenarioGenConfig<T> {
    fn default() -> Self {
        Self {
            region: Region::default(),
            uavs: 5,
            cluster_heads: 5,
            jammers: 4,
            altitude_band: (T::of(10.0), T::of(60.0)),
            seed: 0,
            channel: ChannelParams::default(),
            energy: EnergyParams::default(),
            constraints: Constraints::default(),
        }
    }
}

impl<T: Scalar> ScenarioGenConfig<T> {
    pub fn check(&self) -> Result<()> {
        let r = &self.region;
        if !(r.x.0 < r.x.1 && r.y.0 < r.y.1) {
            return Err(Error::Config("region must have positive width and height".into()));
        }
        if self.uavs == 0 || self.cluster_heads == 0 {
            return Err(Error::Config("need at least one UAV and one cluster head".into()));
        }
        let (lo, hi) = self.altitude_band;
        if !(lo >= T::zero() && lo <= hi) {
            return Err(Error::Config("altitude_band must satisfy 0 <= low <= high".into()));
        }
        Ok(())
    }
}

/// Attempts at drawing a UAV set that respects `d_min`.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

fn uniform<T: Scalar>(rng: &mut ChaCha8Rng, (lo, hi): (T, T)) -> T {
    if lo == hi {
        return lo;
    }
    T::of(rng.gen_range(lo.as_f64()..hi.as_f64()))
}

/// Center of the smallest ground rectangle holding every CH, jammer and gathering UAV.
pub fn bounding_box_center<T: Scalar>(scenario: &Scenario<T>) -> Option<(T, T)> {
    let mut it = scenario
        .nodes
        .iter()
        .filter(|n| matches!(n.role, NodeRole::ClusterHead | NodeRole::Jammer | NodeRole::GatheringUav))
        .map(|n| n.pos);
    let first = it.next()?;
    let (mut x0, mut x1, mut y0, mut y1) = (first.x, first.x, first.y, first.y);
    for p in it {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let half = T::of(0.5);
    Some(((x0 + x1) * half, (y0 + y1) * half))
}

/// Uniform CHs and jammers on the ground, UAVs uniform in the altitude band
/// with `d_min` separation, and the leader at the bounding-box center on the
/// corridor floor.
pub fn generate_scenario<T: Scalar>(config: &ScenarioGenConfig<T>) -> Result<Scenario<T>> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let r = config.region;
    let mut ground = Vec::with_capacity(config.cluster_heads + config.jammers);
    for i in 0..config.cluster_heads {
        let p = Position3D::ground(uniform(&mut rng, r.x), uniform(&mut rng, r.y));
        ground.push(Node::new(format!("ch{i}"), NodeRole::ClusterHead, p));
    }
    for j in 0..config.jammers {
        let p = Position3D::ground(uniform(&mut rng, r.x), uniform(&mut rng, r.y));
        ground.push(Node::new(format!("jam{j}"), NodeRole::Jammer, p));
    }

    let d_min = config.constraints.d_min;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let mut nodes = ground.clone();
        for i in 0..config.uavs {
            let p = Position3D::new(
                uniform(&mut rng, r.x),
                uniform(&mut rng, r.y),
                uniform(&mut rng, config.altitude_band),
            );
            nodes.push(Node::new(format!("uav{i}"), NodeRole::GatheringUav, p));
        }
        let mut scenario =
            Scenario { nodes, channel: config.channel, energy: config.energy, constraints: config.constraints };
        let (cx, cy) = bounding_box_center(&scenario).expect("scenario has nodes");
        scenario.nodes.push(Node::new("leader", NodeRole::Leader, Position3D::new(cx, cy, config.constraints.h_min)));

        let airborne: Vec<Position3D<T>> =
            scenario.nodes.iter().filter(|n| n.role.is_airborne()).map(|n| n.pos).collect();
        let separated =
            airborne.iter().enumerate().all(|(i, a)| airborne[i + 1..].iter().all(|b| a.distance(b) >= d_min));
        if separated {
            return Ok(scenario);
        }
    }
    Err(Error::GeneratorExhausted { uavs: config.uavs, d_min: d_min.as_f64(), attempts: MAX_PLACEMENT_ATTEMPTS })
}

/// Gathering UAVs on the middle plane `z = h_min / 2` (xy unchanged), leader
/// at the bounding-box center on the corridor floor.
pub fn baseline_placement<T: Scalar>(scenario: &Scenario<T>) -> Scenario<T> {
    let mut out = scenario.clone();
    let mid = scenario.constraints.h_min * T::of(0.5);
    for n in out.nodes.iter_mut().filter(|n| n.role == NodeRole::GatheringUav) {
        n.pos.z = mid;
    }
    if let (Some(l), Some((cx, cy))) = (out.leader_index(), bounding_box_center(&out)) {
        out.nodes[l].pos = Position3D::new(cx, cy, scenario.constraints.h_min);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Baseline,
    FixedLeader,
    CorridorLeader,
    FreeLeader,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Baseline, Method::FixedLeader, Method::CorridorLeader, Method::FreeLeader];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::FixedLeader => "fixed-leader",
            Method::CorridorLeader => "corridor-leader",
            Method::FreeLeader => "free-leader",
        }
    }

    pub fn leader_mode(self) -> Option<LeaderMode> {
        match self {
            Method::Baseline => None,
            Method::FixedLeader => Some(LeaderMode::Fixed),
            Method::CorridorLeader => Some(LeaderMode::Corridor),
            Method::FreeLeader => Some(LeaderMode::Free),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    /// Final network lifetime, s.
    pub lifetime: f64,
    pub lambda2: f64,
    pub iterations: usize,
    pub stop: Option<StopReason>,
    pub surrogate_gap: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// One outcome per [`Method::ALL`] entry; empty for excluded trials.
    pub outcomes: Vec<MethodOutcome>,
    /// Why the trial was left out of the aggregate.
    pub excluded: Option<String>,
}

impl TrialResult {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

/// How per-trial scenario seeds are derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialSeeding {
    /// Independent sub-seeds drawn from a generator seeded with the master seed.
    #[default]
    Independent,
    /// Every trial reuses the master seed.
    Repeated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig<T> {
    pub generator: ScenarioGenConfig<T>,
    pub optimizer: OptimizerConfig<T>,
    pub policy: EdgePolicy,
    pub trials: usize,
    pub seed: u64,
    pub seeding: TrialSeeding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_lifetime: f64,
    pub std_dev: f64,
    /// Half-width of the normal-approximation 95% interval, `1.96 s / sqrt(n)`.
    pub ci95_half_width: Option<f64>,
    pub mean_lambda2: f64,
    pub mean_iterations: f64,
    pub surrogate_gaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub schema_version: u32,
    pub trials: usize,
    pub included: usize,
    pub excluded: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
    /// Included trials where the free leader ended below the corridor leader.
    pub free_below_corridor: usize,
}

impl MonteCarloSummary {
    pub fn method(&self, m: Method) -> &MethodSummary {
        self.methods.iter().find(|s| s.method == m).expect("every method is summarized")
    }
}

pub const SCHEMA_VERSION: u32 = 1;
const Z_95: f64 = 1.96;

/// Sub-seed of every trial, in trial order.
pub fn trial_seeds(master: u64, trials: usize, seeding: TrialSeeding) -> Vec<u64> {
    match seeding {
        TrialSeeding::Repeated => vec![master; trials],
        TrialSeeding::Independent => {
            let mut rng = ChaCha8Rng::seed_from_u64(master);
            (0..trials).map(|_| rng.next_u64()).collect()
        }
    }
}

/// Runs one paired trial: baseline plus every leader mode from the same start.
pub fn run_trial<T: Scalar>(config: &MonteCarloConfig<T>, trial: usize, seed: u64) -> Result<TrialResult> {
    let generator = ScenarioGenConfig { seed, ..config.generator.clone() };
    let initial = generate_scenario(&generator)?;
    let mut result = TrialResult { trial, seed, outcomes: Vec::new(), excluded: None };

    let problem = Problem::gathering(&initial, config.policy);
    let start = Instant::now();
    let baseline = match problem.evaluate(&baseline_placement(&initial)) {
        Ok(e) => e,
        Err(e) => {
            result.excluded = Some(format!("baseline: {e}"));
            return Ok(result);
        }
    };
    let initial_eval = problem.evaluate(&initial);
    let feasible = |g: &crate::graph::LifetimeGraph<T>| g.edges.iter().all(|e| e.budget.required_power.is_feasible());
    match &initial_eval {
        Ok(e) if feasible(&e.graph) && feasible(&baseline.graph) => {}
        Ok(_) => {
            result.excluded = Some("infeasible transmit power".into());
            return Ok(result);
        }
        Err(e) => {
            result.excluded = Some(format!("initial: {e}"));
            return Ok(result);
        }
    }
    result.outcomes.push(MethodOutcome {
        method: Method::Baseline,
        lifetime: baseline.lifetime.as_f64(),
        lambda2: baseline.lambda2().as_f64(),
        iterations: 0,
        stop: None,
        surrogate_gap: false,
        wall_time: start.elapsed(),
    });

    for method in &Method::ALL[1..] {
        let mode = method.leader_mode().expect("optimized method");
        let start = Instant::now();
        match optimize_stage1(&initial, config.policy, mode, &config.optimizer) {
            Ok((_, trace)) => result.outcomes.push(MethodOutcome {
                method: *method,
                lifetime: trace.last().lifetime.as_f64(),
                lambda2: trace.last().lambda2.as_f64(),
                iterations: trace.iterations(),
                stop: Some(trace.stop),
                surrogate_gap: trace.surrogate_gap,
                wall_time: start.elapsed(),
            }),
            Err(e) => {
                result.outcomes.clear();
                result.excluded = Some(format!("{}: {e}", mode.name()));
                return Ok(result);
            }
        }
    }
    Ok(result)
}

/// Mean and 95% interval of the final lifetime per method over `trials`
/// paired trials. Trials are independent and may run in parallel; results
/// are reduced in trial order.
pub fn monte_carlo<T: Scalar>(config: &MonteCarloConfig<T>) -> Result<(MonteCarloSummary, Vec<TrialResult>)> {
    if config.trials < 2 {
        return Err(Error::Config(format!("monte carlo needs at least 2 trials, got {}", config.trials)));
    }
    config.generator.check()?;
    config.optimizer.check()?;
    let seeds = trial_seeds(config.seed, config.trials, config.seeding);
    let mut results =
        seeds.par_iter().enumerate().map(|(i, &s)| run_trial(config, i, s)).collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|r| r.trial);
    Ok((summarize(config, &results), results))
}

/// [`monte_carlo`] on a dedicated pool of `jobs` threads.
pub fn monte_carlo_with_jobs<T: Scalar>(
    config: &MonteCarloConfig<T>,
    jobs: usize,
) -> Result<(MonteCarloSummary, Vec<TrialResult>)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| monte_carlo(config))
}

fn summarize<T: Scalar>(config: &MonteCarloConfig<T>, results: &[TrialResult]) -> MonteCarloSummary {
    let included: Vec<&TrialResult> = results.iter().filter(|r| r.excluded.is_none()).collect();
    let n = included.len();
    let methods = Method::ALL
        .iter()
        .map(|&m| {
            let outs: Vec<&MethodOutcome> = included.iter().filter_map(|r| r.outcome(m)).collect();
            let lifetimes: Vec<f64> = outs.iter().map(|o| o.lifetime).collect();
            let (mean, sd) = mean_std(&lifetimes);
            MethodSummary {
                method: m,
                mean_lifetime: mean,
                std_dev: sd,
                ci95_half_width: (n >= 2).then(|| Z_95 * sd / (n as f64).sqrt()),
                mean_lambda2: mean_std(&outs.iter().map(|o| o.lambda2).collect::<Vec<_>>()).0,
                mean_iterations: mean_std(&outs.iter().map(|o| o.iterations as f64).collect::<Vec<_>>()).0,
                surrogate_gaps: outs.iter().filter(|o| o.surrogate_gap).count(),
            }
        })
        .collect();
    let free_below_corridor = included
        .iter()
        .filter(|r| match (r.outcome(Method::FreeLeader), r.outcome(Method::CorridorLeader)) {
            (Some(f), Some(c)) => f.lifetime < c.lifetime,
            _ => false,
        })
        .count();
    MonteCarloSummary {
        schema_version: SCHEMA_VERSION,
        trials: results.len(),
        included: n,
        excluded: results.len() - n,
        seed: config.seed,
        methods,
        free_below_corridor,
    }
}

/// Sample mean and standard deviation (`n - 1` denominator; zero below two samples).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `trial,seed,method,status,lifetime,lambda2,iterations,stop`, one row per trial and method.
pub fn write_trials_csv<W: Write>(results: &[TrialResult], mut out: W) -> io::Result<()> {
    writeln!(out, "trial,seed,method,status,lifetime,lambda2,iterations,stop")?;
    for r in results {
        for m in Method::ALL {
            match r.outcome(m) {
                Some(o) => writeln!(
                    out,
                    "{},{},{},ok,{:.16e},{:.16e},{},{}",
                    r.trial,
                    r.seed,
                    m.name(),
                    o.lifetime,
                    o.lambda2,
                    o.iterations,
                    o.stop.map(stop_name).unwrap_or("")
                )?,
                None => writeln!(out, "{},{},{},excluded,,,,", r.trial, r.seed, m.name())?,
            }
        }
    }
    Ok(())
}

/// Worst analytic-vs-FD gradient disagreement over random scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub samples: usize,
    /// Samples whose `lambda2` was repeated, where no gradient exists.
    pub skipped_degenerate: usize,
    pub max_rel_error: f64,
    /// `(sample, node id, axis)` of the worst coordinate.
    pub worst: Option<(usize, String, &'static str)>,
}

impl GradientReport {
    pub fn passes(&self) -> bool {
        self.max_rel_error <= GRADIENT_REL_TOL
    }
}

/// Compares the analytic gradient over every UAV and the leader against
/// central differences with `step`, on `samples` generated scenarios.
pub fn gradient_check<T: Scalar>(
    generator: &ScenarioGenConfig<T>,
    policy: EdgePolicy,
    samples: usize,
    seed: u64,
    step: T,
) -> Result<GradientReport> {
    let mut report = GradientReport { samples, skipped_degenerate: 0, max_rel_error: 0.0, worst: None };
    for (i, s) in trial_seeds(seed, samples, TrialSeeding::Independent).into_iter().enumerate() {
        let scenario = generate_scenario(&ScenarioGenConfig { seed: s, ..generator.clone() })?;
        let problem = Problem::gathering(&scenario, policy);
        let spec = stage1_projection(&scenario, LeaderMode::Free)?;
        let eval = problem.evaluate(&scenario)?;
        let fd = fd_gradient_oracle(&scenario, &problem, &spec.movable, step)?;
        if !fd.reliable {
            report.skipped_degenerate += 1;
            continue;
        }
        let analytic = lambda2_gradient(&scenario, &eval.graph, &eval.spectral, &spec.movable, &problem.ctx)?;
        let cmp = compare_gradients(&analytic, &fd.gradient);
        if report.worst.is_none() || cmp.max_rel_error > report.max_rel_error {
            report.max_rel_error = cmp.max_rel_error;
            report.worst = cmp.worst.map(|(node, axis)| (i, scenario.nodes[node].id.clone(), axis.name()));
        }
    }
    Ok(report)
}

pub fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max-iterations",
        StopReason::StepExhausted => "step-exhausted",
    }
}
