//! The TOML run configuration.
//!
//! Every section is optional and falls back to the table defaults (with
//! `B = 10 MHz`). An explicit `[[nodes]]` list replaces the random generator.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::units::{parse, Kind, Quantity};
use crate::error::{Error, Result};
use crate::graph::EdgePolicy;
use crate::harness::{generate_scenario, Region, ScenarioGenConfig};
use crate::model::{
    validate_for_policy, ChannelParams, Constraints, EnergyParams, Node, NodeRole, Position3D, Scenario,
};
use crate::optimizer::OptimizerConfig;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    channel: RawChannel,
    energy: RawEnergy,
    constraints: RawConstraints,
    graph: RawGraph,
    optimizer: RawOptimizer,
    generator: RawGenerator,
    #[serde(skip_serializing_if = "Option::is_none")]
    backhaul: Option<RawBackhaul>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    nodes: Vec<RawNode>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawChannel {
    alpha_los: Option<Quantity>,
    alpha_nlos: Option<Quantity>,
    mu_los: Option<Quantity>,
    mu_nlos: Option<Quantity>,
    carrier_frequency: Option<Quantity>,
    noise_psd: Option<Quantity>,
    bandwidth: Option<Quantity>,
    rate: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawEnergy {
    node_energy: Option<Quantity>,
    circuit_power: Option<Quantity>,
    jammer_power: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConstraints {
    h_min: Option<Quantity>,
    d_min: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawGraph {
    policy: Option<EdgePolicy>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawOptimizer {
    step_size: Option<Quantity>,
    backtrack: Option<Quantity>,
    max_iterations: Option<usize>,
    grad_tol: Option<Quantity>,
    min_step: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawGenerator {
    region_x: Option<[Quantity; 2]>,
    region_y: Option<[Quantity; 2]>,
    uavs: Option<usize>,
    cluster_heads: Option<usize>,
    jammers: Option<usize>,
    altitude_band: Option<[Quantity; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    role: NodeRole,
    position: [Quantity; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawBackhaul {
    bs: Option<[Quantity; 3]>,
    relays: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackhaulSpec {
    pub bs: Option<Position3D<f64>>,
    pub relays: Option<usize>,
}

/// A fully resolved configuration in SI units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub policy: EdgePolicy,
    pub optimizer: OptimizerConfig<f64>,
    /// Also carries the channel, energy and constraint parameters.
    pub generator: ScenarioGenConfig<f64>,
    pub nodes: Option<Vec<Node<f64>>>,
    pub backhaul: Option<BackhaulSpec>,
}

fn opt(field: &str, q: &Option<Quantity>, kind: Kind, default: f64) -> Result<f64> {
    q.as_ref().map_or(Ok(default), |q| parse(field, q, kind))
}

fn pair(field: &str, q: &Option<[Quantity; 2]>, default: (f64, f64)) -> Result<(f64, f64)> {
    match q {
        None => Ok(default),
        Some([a, b]) => Ok((parse(field, a, Kind::Length)?, parse(field, b, Kind::Length)?)),
    }
}

fn position(field: &str, q: &[Quantity; 3]) -> Result<Position3D<f64>> {
    Ok(Position3D::new(
        parse(field, &q[0], Kind::Length)?,
        parse(field, &q[1], Kind::Length)?,
        parse(field, &q[2], Kind::Length)?,
    ))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        Self::resolve(&raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn resolve(raw: &RawConfig) -> Result<Self> {
        let (c, dc) = (&raw.channel, ChannelParams::<f64>::default());
        let channel = ChannelParams {
            alpha_los: opt("channel.alpha_los", &c.alpha_los, Kind::Scalar, dc.alpha_los)?,
            alpha_nlos: opt("channel.alpha_nlos", &c.alpha_nlos, Kind::Scalar, dc.alpha_nlos)?,
            mu_los: opt("channel.mu_los", &c.mu_los, Kind::Ratio, dc.mu_los)?,
            mu_nlos: opt("channel.mu_nlos", &c.mu_nlos, Kind::Ratio, dc.mu_nlos)?,
            carrier_freq: opt("channel.carrier_frequency", &c.carrier_frequency, Kind::Frequency, dc.carrier_freq)?,
            noise_psd: opt("channel.noise_psd", &c.noise_psd, Kind::PowerDensity, dc.noise_psd)?,
            total_bandwidth: opt("channel.bandwidth", &c.bandwidth, Kind::Frequency, dc.total_bandwidth)?,
            rate_req: opt("channel.rate", &c.rate, Kind::Rate, dc.rate_req)?,
        };
        let (e, de) = (&raw.energy, EnergyParams::<f64>::default());
        let energy = EnergyParams {
            node_energy: opt("energy.node_energy", &e.node_energy, Kind::Energy, de.node_energy)?,
            circuit_power: opt("energy.circuit_power", &e.circuit_power, Kind::Power, de.circuit_power)?,
            jammer_power: opt("energy.jammer_power", &e.jammer_power, Kind::Power, de.jammer_power)?,
        };
        let dk = Constraints::<f64>::default();
        let constraints = Constraints {
            h_min: opt("constraints.h_min", &raw.constraints.h_min, Kind::Length, dk.h_min)?,
            d_min: opt("constraints.d_min", &raw.constraints.d_min, Kind::Length, dk.d_min)?,
        };

        let (o, d_o) = (&raw.optimizer, OptimizerConfig::<f64>::default());
        let optimizer = OptimizerConfig {
            step_size: opt("optimizer.step_size", &o.step_size, Kind::Length, d_o.step_size)?,
            backtrack: opt("optimizer.backtrack", &o.backtrack, Kind::Scalar, d_o.backtrack)?,
            max_iterations: o.max_iterations.unwrap_or(d_o.max_iterations),
            grad_tol: opt("optimizer.grad_tol", &o.grad_tol, Kind::Scalar, d_o.grad_tol)?,
            min_step: opt("optimizer.min_step", &o.min_step, Kind::Length, d_o.min_step)?,
        };
        optimizer.check()?;

        let (g, dg) = (&raw.generator, ScenarioGenConfig::<f64>::default());
        let generator = ScenarioGenConfig {
            region: Region {
                x: pair("generator.region_x", &g.region_x, dg.region.x)?,
                y: pair("generator.region_y", &g.region_y, dg.region.y)?,
            },
            uavs: g.uavs.unwrap_or(dg.uavs),
            cluster_heads: g.cluster_heads.unwrap_or(dg.cluster_heads),
            jammers: g.jammers.unwrap_or(dg.jammers),
            altitude_band: pair("generator.altitude_band", &g.altitude_band, dg.altitude_band)?,
            seed: 0,
            channel,
            energy,
            constraints,
        };
        generator.check().map_err(|e| Error::Config(format!("generator: {e}")))?;

        let nodes = if raw.nodes.is_empty() {
            None
        } else {
            let mut out = Vec::with_capacity(raw.nodes.len());
            for n in &raw.nodes {
                let field = format!("nodes.{}.position", n.id);
                let mut node = Node::new(n.id.clone(), n.role, position(&field, &n.position)?);
                if let Some(w) = n.weight {
                    node.weight = w;
                }
                out.push(node);
            }
            Some(out)
        };

        let backhaul = match &raw.backhaul {
            None => None,
            Some(b) => Some(BackhaulSpec {
                bs: b.bs.as_ref().map(|q| position("backhaul.bs", q)).transpose()?,
                relays: b.relays,
            }),
        };

        Ok(Self { seed: raw.seed, policy: raw.graph.policy.unwrap_or_default(), optimizer, generator, nodes, backhaul })
    }

    /// The explicit node list, or a generated scenario for `seed`, validated.
    pub fn scenario(&self, seed: u64) -> Result<Scenario<f64>> {
        let g = &self.generator;
        let scenario = match &self.nodes {
            Some(nodes) => {
                Scenario { nodes: nodes.clone(), channel: g.channel, energy: g.energy, constraints: g.constraints }
            }
            None => generate_scenario(&ScenarioGenConfig { seed, ..g.clone() })?,
        };
        let violations = validate_for_policy(&scenario, self.policy);
        if violations.is_empty() {
            Ok(scenario)
        } else {
            Err(Error::InvalidScenario(violations))
        }
    }

    /// Serializes back to TOML in SI numbers, with `nodes` as the explicit roster.
    pub fn to_toml(&self, seed: u64, nodes: Option<&[Node<f64>]>) -> String {
        let g = &self.generator;
        let q = |v: f64| Some(Quantity::Number(v));
        let pair = |(a, b): (f64, f64)| Some([Quantity::Number(a), Quantity::Number(b)]);
        let pos = |p: &Position3D<f64>| [Quantity::Number(p.x), Quantity::Number(p.y), Quantity::Number(p.z)];
        let raw = RawConfig {
            seed: Some(seed),
            channel: RawChannel {
                alpha_los: q(g.channel.alpha_los),
                alpha_nlos: q(g.channel.alpha_nlos),
                mu_los: q(g.channel.mu_los),
                mu_nlos: q(g.channel.mu_nlos),
                carrier_frequency: q(g.channel.carrier_freq),
                noise_psd: q(g.channel.noise_psd),
                bandwidth: q(g.channel.total_bandwidth),
                rate: q(g.channel.rate_req),
            },
            energy: RawEnergy {
                node_energy: q(g.energy.node_energy),
                circuit_power: q(g.energy.circuit_power),
                jammer_power: q(g.energy.jammer_power),
            },
            constraints: RawConstraints { h_min: q(g.constraints.h_min), d_min: q(g.constraints.d_min) },
            graph: RawGraph { policy: Some(self.policy) },
            optimizer: RawOptimizer {
                step_size: q(self.optimizer.step_size),
                backtrack: q(self.optimizer.backtrack),
                max_iterations: Some(self.optimizer.max_iterations),
                grad_tol: q(self.optimizer.grad_tol),
                min_step: q(self.optimizer.min_step),
            },
            generator: RawGenerator {
                region_x: pair(g.region.x),
                region_y: pair(g.region.y),
                uavs: Some(g.uavs),
                cluster_heads: Some(g.cluster_heads),
                jammers: Some(g.jammers),
                altitude_band: pair(g.altitude_band),
            },
            backhaul: self.backhaul.as_ref().map(|b| RawBackhaul { bs: b.bs.as_ref().map(pos), relays: b.relays }),
            nodes: nodes
                .or(self.nodes.as_deref())
                .unwrap_or_default()
                .iter()
                .map(|n| RawNode { id: n.id.clone(), role: n.role, position: pos(&n.pos), weight: Some(n.weight) })
                .collect(),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}
