//! The `uavlife` command line.
//!
//! Exit codes: 0 success, 1 invalid configuration or usage, 2 infeasible
//! starting constraints, 3 gradient check above tolerance.

pub mod config;
pub mod output;
pub mod units;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::EdgePolicy;
use crate::harness::{
    gradient_check, monte_carlo, monte_carlo_with_jobs, write_trials_csv, MonteCarloConfig, TrialSeeding,
};
use crate::model::{validate_for_policy, NodeRole, Position3D};
use crate::objective::{Evaluation, Problem};
use crate::optimizer::{
    backhaul_scenario, optimize_stage1, optimize_stage2_backhaul, LeaderMode, OptimizerTrace, StopReason,
};
use config::RunConfig;
use output::{Metrics, OutputDir, PositionRecord, RunManifest, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_GRADIENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "uavlife", version, about = "Lifetime-maximizing UAV placement under jamming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Fixed,
    Corridor,
    Free,
}

impl From<Mode> for LeaderMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Fixed => LeaderMode::Fixed,
            Mode::Corridor => LeaderMode::Corridor,
            Mode::Free => LeaderMode::Free,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Place the gathering UAVs (and leader) for one scenario.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "corridor")]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare baseline and the three leader modes over random scenarios.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..))]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to all cores.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
    },
    /// Check the analytic gradient against central differences.
    ValidateGradient {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// Finite-difference step, m.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Stage-1 placement followed by relay placement toward the base station.
    Backhaul {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        relays: Option<usize>,
        #[arg(long, value_enum, default_value = "corridor")]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lint the configured scenario.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let printable: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, &printable, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleStart(_) | Error::GeneratorExhausted { .. } => EXIT_INFEASIBLE,
        _ => EXIT_INVALID,
    }
}

struct Loaded {
    config: RunConfig,
    text: String,
    path: PathBuf,
}

fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    Ok(Loaded { config: RunConfig::from_toml(&text)?, text, path: path.to_path_buf() })
}

impl Loaded {
    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.config.seed).unwrap_or(0)
    }

    fn manifest(&self, command: &str, args: &[String], seed: u64, out: &Path) -> RunManifest {
        RunManifest::new(command, &self.path, &self.text, args, seed, out)
    }
}

fn metrics(e: &Evaluation<f64>) -> Metrics {
    Metrics { lambda2: e.lambda2(), lifetime: e.lifetime }
}

fn step_metrics(t: &OptimizerTrace<f64>, last: bool) -> Metrics {
    let s = if last { t.last() } else { t.first() };
    Metrics { lambda2: s.lambda2, lifetime: s.lifetime }
}

#[derive(Serialize)]
struct RunStats {
    iterations: usize,
    stop: StopReason,
    surrogate_gap: bool,
    projection_nonconverged: bool,
    degenerate_iterations: usize,
    /// Iterations that stepped along a multi-eigenvalue direction.
    crossing_steps: usize,
}

impl RunStats {
    fn of(t: &OptimizerTrace<f64>) -> Self {
        Self {
            iterations: t.iterations(),
            stop: t.stop,
            surrogate_gap: t.surrogate_gap,
            projection_nonconverged: t.projection_nonconverged,
            degenerate_iterations: t.degenerate_iterations(),
            crossing_steps: t.steps.iter().filter(|s| s.cluster > 1).count(),
        }
    }
}

#[derive(Serialize)]
struct OptimizeSummary {
    schema_version: u32,
    command: &'static str,
    mode: LeaderMode,
    seed: u64,
    policy: EdgePolicy,
    initial: Metrics,
    #[serde(rename = "final")]
    final_: Metrics,
    #[serde(flatten)]
    stats: RunStats,
    positions: Vec<PositionRecord>,
}

#[derive(Serialize)]
struct MonteCarloOutput<'a> {
    #[serde(flatten)]
    summary: &'a crate::harness::MonteCarloSummary,
    policy: EdgePolicy,
}

#[derive(Serialize)]
struct BackhaulSummary {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    relays: usize,
    bs: PositionRecord,
    stage1: Stage1Summary,
    initial: Metrics,
    #[serde(rename = "final")]
    final_: Metrics,
    #[serde(flatten)]
    stats: RunStats,
    positions: Vec<PositionRecord>,
}

#[derive(Serialize)]
struct Stage1Summary {
    mode: LeaderMode,
    lifetime: f64,
    lambda2: f64,
    iterations: usize,
    leader: PositionRecord,
}

fn dispatch(command: Command, args: &[String], stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Optimize { config, mode, seed, out } => {
            let loaded = load(&config)?;
            let seed = loaded.seed(seed);
            let cfg = &loaded.config;
            let scenario = cfg.scenario(seed)?;
            let mode = LeaderMode::from(mode);
            let (fin, trace) = optimize_stage1(&scenario, cfg.policy, mode, &cfg.optimizer)?;
            let dir = OutputDir::create(&out)?;
            let summary = OptimizeSummary {
                schema_version: SCHEMA_VERSION,
                command: "optimize",
                mode,
                seed,
                policy: cfg.policy,
                initial: step_metrics(&trace, false),
                final_: step_metrics(&trace, true),
                stats: RunStats::of(&trace),
                positions: fin.nodes.iter().filter(|n| n.role.is_airborne()).map(PositionRecord::of).collect(),
            };
            dir.write_json("summary.json", &summary)?;
            dir.write_with("trace.csv", |w| trace.write_csv(w))?;
            dir.write_text("final_scenario.toml", &cfg.to_toml(seed, Some(&fin.nodes)))?;
            dir.write_json("manifest.json", &loaded.manifest("optimize", args, seed, &out))?;
            writeln!(
                stdout,
                "{}: lifetime {:.6e} s -> {:.6e} s, lambda2 {:.6e} -> {:.6e}, {} iterations ({:?})",
                mode.name(),
                summary.initial.lifetime,
                summary.final_.lifetime,
                summary.initial.lambda2,
                summary.final_.lambda2,
                summary.stats.iterations,
                summary.stats.stop
            )
            .ok();
            Ok(EXIT_OK)
        }
        Command::Montecarlo { config, trials, seed, out, jobs } => {
            let loaded = load(&config)?;
            let seed = loaded.seed(seed);
            let cfg = &loaded.config;
            // fail fast on parameters the generator accepts but the model rejects
            cfg.scenario(seed)?;
            let mc = MonteCarloConfig {
                generator: cfg.generator.clone(),
                optimizer: cfg.optimizer,
                policy: cfg.policy,
                trials: trials as usize,
                seed,
                seeding: TrialSeeding::Independent,
            };
            let (summary, results) = match jobs {
                Some(j) => monte_carlo_with_jobs(&mc, j as usize)?,
                None => monte_carlo(&mc)?,
            };
            let dir = OutputDir::create(&out)?;
            dir.write_json("aggregate.json", &MonteCarloOutput { summary: &summary, policy: cfg.policy })?;
            dir.write_with("trials.csv", |w| write_trials_csv(&results, w))?;
            dir.write_json("manifest.json", &loaded.manifest("montecarlo", args, seed, &out))?;
            for m in &summary.methods {
                writeln!(
                    stdout,
                    "{:<16} mean lifetime {:.6e} s  +/- {}",
                    m.method.name(),
                    m.mean_lifetime,
                    m.ci95_half_width.map_or("n/a".to_string(), |h| format!("{h:.3e}"))
                )
                .ok();
            }
            writeln!(stdout, "{} trials, {} excluded", summary.trials, summary.excluded).ok();
            Ok(EXIT_OK)
        }
        Command::ValidateGradient { config, samples, step, seed } => {
            let loaded = load(&config)?;
            let seed = loaded.seed(seed);
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Config(format!("step must be a positive number, got {step}")));
            }
            let report = gradient_check(&loaded.config.generator, loaded.config.policy, samples as usize, seed, step)?;
            writeln!(
                stdout,
                "max relative error {:.3e} over {} samples ({} degenerate skipped)",
                report.max_rel_error, report.samples, report.skipped_degenerate
            )
            .ok();
            if report.passes() {
                Ok(EXIT_OK)
            } else {
                if let Some((sample, node, axis)) = &report.worst {
                    writeln!(stdout, "worst coordinate: sample {sample}, node {node}, axis {axis}").ok();
                }
                Ok(EXIT_GRADIENT)
            }
        }
        Command::Backhaul { config, relays, mode, seed, out } => {
            let loaded = load(&config)?;
            let seed = loaded.seed(seed);
            let cfg = &loaded.config;
            let spec = cfg.backhaul.as_ref();
            let bs = spec
                .and_then(|b| b.bs)
                .ok_or_else(|| Error::Config("backhaul.bs: base station position is required".into()))?;
            let relays = relays.or(spec.and_then(|b| b.relays)).unwrap_or(1);
            let scenario = cfg.scenario(seed)?;
            let mode = LeaderMode::from(mode);
            let (stage1, trace1) = optimize_stage1(&scenario, cfg.policy, mode, &cfg.optimizer)?;
            let leader = stage1.leader_index().ok_or(Error::MissingRole("leader"))?;
            check_backhaul(&stage1, bs)?;
            let (fin, trace) = optimize_stage2_backhaul(&stage1, bs, relays, &cfg.optimizer)?;
            let dir = OutputDir::create(&out)?;
            let summary = BackhaulSummary {
                schema_version: SCHEMA_VERSION,
                command: "backhaul",
                seed,
                relays,
                bs: PositionRecord::new("bs", bs),
                stage1: Stage1Summary {
                    mode,
                    lifetime: trace1.last().lifetime,
                    lambda2: trace1.last().lambda2,
                    iterations: trace1.iterations(),
                    leader: PositionRecord::of(&stage1.nodes[leader]),
                },
                initial: step_metrics(&trace, false),
                final_: step_metrics(&trace, true),
                stats: RunStats::of(&trace),
                positions: fin
                    .nodes
                    .iter()
                    .filter(|n| n.role == NodeRole::BackhaulUav)
                    .map(PositionRecord::of)
                    .collect(),
            };
            dir.write_json("summary.json", &summary)?;
            dir.write_with("trace.csv", |w| trace.write_csv(w))?;
            dir.write_with("stage1_trace.csv", |w| trace1.write_csv(w))?;
            dir.write_text("final_scenario.toml", &cfg.to_toml(seed, Some(&stage1.nodes)))?;
            dir.write_json("manifest.json", &loaded.manifest("backhaul", args, seed, &out))?;
            writeln!(
                stdout,
                "{relays} relays: backhaul lifetime {:.6e} s -> {:.6e} s ({} iterations)",
                summary.initial.lifetime, summary.final_.lifetime, summary.stats.iterations
            )
            .ok();
            Ok(EXIT_OK)
        }
        Command::Validate { config, seed } => {
            let loaded = load(&config)?;
            let seed = loaded.seed(seed);
            let cfg = &loaded.config;
            let scenario = match cfg.scenario(seed) {
                Ok(s) => s,
                Err(Error::InvalidScenario(vs)) => {
                    for v in &vs {
                        writeln!(stdout, "{v}").ok();
                    }
                    return Err(Error::InvalidScenario(vs));
                }
                Err(e) => return Err(e),
            };
            debug_assert!(validate_for_policy(&scenario, cfg.policy).is_empty());
            let eval = Problem::gathering(&scenario, cfg.policy).evaluate(&scenario)?;
            let m = metrics(&eval);
            writeln!(
                stdout,
                "ok: {} nodes, lifetime {:.6e} s, lambda2 {:.6e}",
                scenario.nodes.len(),
                m.lifetime,
                m.lambda2
            )
            .ok();
            Ok(EXIT_OK)
        }
    }
}

fn check_backhaul(stage1: &crate::model::Scenario<f64>, bs: Position3D<f64>) -> Result<()> {
    if bs.z != 0.0 {
        return Err(Error::Config(format!(
            "backhaul.bs: base station must be on the ground (z = 0), got z = {}",
            bs.z
        )));
    }
    let probe = backhaul_scenario(stage1, bs, 0)?;
    Problem::backhaul(stage1).evaluate(&probe).map(|_| ())
}
