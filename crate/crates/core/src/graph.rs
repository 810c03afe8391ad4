//! Lifetime-weighted flow graph and its Laplacians.
//!
//! Edge `p -> q` carries the lifetime of node `p` while it sustains the rate
//! requirement towards `q`. Spectral quantities use the symmetrized adjacency
//! `(A + A^T) / 2`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::channel::{link_budget, LinkBudget, LinkContext, LinkType, TxPower};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::model::{EnergyParams, NodeRole, Scenario};
use crate::scalar::Scalar;

/// How cluster heads are wired to gathering UAVs. Every UAV always links to the leader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgePolicy {
    /// CH `i` transmits to UAV `i`.
    #[default]
    TwoHopPaired,
    /// Each CH transmits to its nearest UAV.
    TwoHopNearest,
    /// Every CH transmits to every UAV.
    Full,
}

impl EdgePolicy {
    pub fn name(self) -> &'static str {
        match self {
            EdgePolicy::TwoHopPaired => "two-hop-paired",
            EdgePolicy::TwoHopNearest => "two-hop-nearest",
            EdgePolicy::Full => "full",
        }
    }
}

/// Which nodes a graph spans and how they are connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// CHs, gathering UAVs and the leader.
    Gathering(EdgePolicy),
    /// leader -> backhaul relays (roster order) -> base station.
    BackhaulChain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    /// Graph-local index of the transmitter.
    pub tx: usize,
    /// Graph-local index of the receiver.
    pub rx: usize,
    pub budget: LinkBudget<T>,
    /// Link lifetime `a_pq`, s. Zero when the link is infeasible.
    pub weight: T,
}

#[derive(Debug, Clone)]
pub struct LifetimeGraph<T> {
    /// Scenario index of each graph node.
    pub members: Vec<usize>,
    pub ids: Vec<String>,
    pub edges: Vec<Edge<T>>,
    /// Directed weights `A = [a_pq]`.
    pub adjacency: SquareMatrix<T>,
    /// `(A + A^T) / 2`.
    pub symmetric: SquareMatrix<T>,
    /// Generalized degrees `beta_p`, row sums of the symmetrized adjacency.
    pub degree: Vec<T>,
    /// `D - A_sym`.
    pub laplacian: SquareMatrix<T>,
    pub node_weights: Vec<T>,
    /// `W^{-1/2} L W^{-1/2}`.
    pub weighted_laplacian: SquareMatrix<T>,
}

impl<T: Scalar> LifetimeGraph<T> {
    pub fn n(&self) -> usize {
        self.members.len()
    }

    /// Graph-local index of scenario node `scenario_index`, if it is a member.
    pub fn local_index(&self, scenario_index: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == scenario_index)
    }

    /// The edge with the smallest lifetime.
    pub fn bottleneck(&self) -> Option<&Edge<T>> {
        self.edges.iter().min_by(|a, b| a.weight.partial_cmp(&b.weight).expect("finite weights"))
    }

    /// Writes `tx,rx,distance,required_power,weight`, one row per directed edge.
    pub fn write_edge_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "tx,rx,distance,required_power,weight")?;
        for e in &self.edges {
            let power = match e.budget.required_power {
                TxPower::Feasible(p) => format!("{:.16e}", p.as_f64()),
                TxPower::Infeasible => "inf".to_string(),
            };
            writeln!(
                out,
                "{},{},{:.16e},{},{:.16e}",
                self.ids[e.tx],
                self.ids[e.rx],
                e.budget.distance.as_f64(),
                power,
                e.weight.as_f64()
            )?;
        }
        Ok(())
    }
}

/// `E_p / (P_pq + P_p^c)`, or zero for an infeasible power.
pub fn lifetime_for_power<T: Scalar>(power: TxPower<T>, energy: &EnergyParams<T>) -> T {
    match power {
        TxPower::Feasible(p) => energy.node_energy / (p + energy.circuit_power),
        TxPower::Infeasible => T::zero(),
    }
}

/// Lifetime of the link from scenario node `tx` to scenario node `rx`.
pub fn edge_weight<T: Scalar>(tx: usize, rx: usize, scenario: &Scenario<T>) -> Result<T> {
    let ctx = LinkContext::for_gathering(scenario);
    let (a, b) = (&scenario.nodes[tx], &scenario.nodes[rx]);
    let budget = link_budget(&a.pos, &b.pos, LinkType::between(a.role, b.role), &ctx).map_err(|e| match e {
        Error::CoincidentPositions => Error::CoincidentEndpoints { tx: a.id.clone(), rx: b.id.clone() },
        other => other,
    })?;
    Ok(lifetime_for_power(budget.required_power, &scenario.energy))
}

/// Directed `(tx, rx)` pair of scenario indices.
pub type Link = (usize, usize);

/// Graph members (scenario indices) and directed edges between them.
pub fn topology_edges<T: Scalar>(scenario: &Scenario<T>, topology: Topology) -> Result<(Vec<usize>, Vec<Link>)> {
    match topology {
        Topology::Gathering(policy) => {
            let chs = scenario.indices_of(NodeRole::ClusterHead);
            let uavs = scenario.indices_of(NodeRole::GatheringUav);
            let leader = scenario.leader_index().ok_or(Error::MissingRole("leader"))?;
            if uavs.is_empty() {
                return Err(Error::MissingRole("gathering-uav"));
            }
            let mut edges = Vec::new();
            match policy {
                EdgePolicy::TwoHopPaired => {
                    edges.extend(chs.iter().zip(&uavs).map(|(&c, &u)| (c, u)));
                }
                EdgePolicy::TwoHopNearest => {
                    for &c in &chs {
                        let p = scenario.nodes[c].pos;
                        let mut best = uavs[0];
                        for &u in &uavs[1..] {
                            if scenario.nodes[u].pos.distance(&p) < scenario.nodes[best].pos.distance(&p) {
                                best = u;
                            }
                        }
                        edges.push((c, best));
                    }
                }
                EdgePolicy::Full => {
                    for &c in &chs {
                        edges.extend(uavs.iter().map(|&u| (c, u)));
                    }
                }
            }
            edges.extend(uavs.iter().map(|&u| (u, leader)));
            let members = chs.into_iter().chain(uavs).chain(std::iter::once(leader)).collect();
            Ok((members, edges))
        }
        Topology::BackhaulChain => {
            let leader = scenario.leader_index().ok_or(Error::MissingRole("leader"))?;
            let bs = scenario
                .nodes
                .iter()
                .position(|n| n.role == NodeRole::BaseStation)
                .ok_or(Error::MissingRole("base-station"))?;
            let mut members = vec![leader];
            members.extend(scenario.indices_of(NodeRole::BackhaulUav));
            members.push(bs);
            let edges = members.windows(2).map(|w| (w[0], w[1])).collect();
            Ok((members, edges))
        }
    }
}

/// Builds the graph over `topology` with link parameters from `ctx`.
pub fn build_topology<T: Scalar>(
    scenario: &Scenario<T>,
    topology: Topology,
    ctx: &LinkContext<T>,
) -> Result<LifetimeGraph<T>> {
    let (members, directed) = topology_edges(scenario, topology)?;
    let n = members.len();
    let local = |s: usize| members.iter().position(|&m| m == s).expect("edge endpoint is a member");

    let mut adjacency = SquareMatrix::zeros(n);
    let mut edges = Vec::with_capacity(directed.len());
    for (s_tx, s_rx) in directed {
        let (a, b) = (&scenario.nodes[s_tx], &scenario.nodes[s_rx]);
        let budget = link_budget(&a.pos, &b.pos, LinkType::between(a.role, b.role), ctx).map_err(|e| match e {
            Error::CoincidentPositions => Error::CoincidentEndpoints { tx: a.id.clone(), rx: b.id.clone() },
            other => other,
        })?;
        let weight = lifetime_for_power(budget.required_power, &ctx.energy);
        let (tx, rx) = (local(s_tx), local(s_rx));
        adjacency[(tx, rx)] = adjacency[(tx, rx)] + weight;
        edges.push(Edge { tx, rx, budget, weight });
    }

    let half = T::of(0.5);
    let mut symmetric = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                symmetric[(i, j)] = (adjacency[(i, j)] + adjacency[(j, i)]) * half;
            }
        }
    }
    let degree: Vec<T> = (0..n).map(|i| symmetric.row(i).iter().copied().sum()).collect();
    let mut laplacian = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            laplacian[(i, j)] = if i == j { degree[i] } else { -symmetric[(i, j)] };
        }
    }

    let node_weights: Vec<T> = members.iter().map(|&m| scenario.nodes[m].weight).collect();
    let inv_sqrt: Vec<T> = node_weights.iter().map(|w| w.sqrt().recip()).collect();
    let mut weighted_laplacian = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            weighted_laplacian[(i, j)] = if node_weights[i] == T::one() && node_weights[j] == T::one() {
                laplacian[(i, j)]
            } else {
                laplacian[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
            };
        }
    }

    let ids = members.iter().map(|&m| scenario.nodes[m].id.clone()).collect();
    Ok(LifetimeGraph { members, ids, edges, adjacency, symmetric, degree, laplacian, node_weights, weighted_laplacian })
}

/// Stage-1 graph over CHs, gathering UAVs and the leader.
pub fn build_graph<T: Scalar>(scenario: &Scenario<T>, policy: EdgePolicy) -> Result<LifetimeGraph<T>> {
    build_topology(scenario, Topology::Gathering(policy), &LinkContext::for_gathering(scenario))
}

/// Minimum directed-edge lifetime, s. Infinite for an edgeless graph.
pub fn network_lifetime<T: Scalar>(graph: &LifetimeGraph<T>) -> T {
    graph.edges.iter().fold(T::infinity(), |m, e| m.min(e.weight))
}
