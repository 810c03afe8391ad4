//! Node roster, radio/energy parameters and scenario validation.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::graph::EdgePolicy;
use crate::scalar::Scalar;

/// A point in meters. `z` is altitude above ground.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3D<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Position3D<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn ground(x: T, y: T) -> Self {
        Self { x, y, z: T::zero() }
    }

    pub fn coord(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn coord_mut(&mut self, axis: Axis) -> &mut T {
        match axis {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
            Axis::Z => &mut self.z,
        }
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> Position3D<U> {
        Position3D { x: f(self.x), y: f(self.y), z: f(self.z) }
    }
}

impl<T: Scalar> Add for Position3D<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Position3D<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Position3D<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    ClusterHead,
    GatheringUav,
    Leader,
    Jammer,
    BackhaulUav,
    BaseStation,
}

impl NodeRole {
    /// Terrestrial roles sit at exactly zero altitude.
    pub fn is_terrestrial(self) -> bool {
        matches!(self, NodeRole::ClusterHead | NodeRole::Jammer | NodeRole::BaseStation)
    }

    pub fn is_airborne(self) -> bool {
        !self.is_terrestrial()
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeRole::ClusterHead => "cluster-head",
            NodeRole::GatheringUav => "gathering-uav",
            NodeRole::Leader => "leader",
            NodeRole::Jammer => "jammer",
            NodeRole::BackhaulUav => "backhaul-uav",
            NodeRole::BaseStation => "base-station",
        }
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node<T> {
    pub id: String,
    pub role: NodeRole,
    pub pos: Position3D<T>,
    /// Weight `w_i` used in the weighted Laplacian and Cheeger constant.
    pub weight: T,
}

impl<T: Scalar> Node<T> {
    pub fn new(id: impl Into<String>, role: NodeRole, pos: Position3D<T>) -> Self {
        Self { id: id.into(), role, pos, weight: T::one() }
    }
}

/// Radio parameters. All quantities are linear SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    /// LoS path-loss exponent (air-to-air).
    pub alpha_los: T,
    /// NLoS path-loss exponent (ground-to-air).
    pub alpha_nlos: T,
    /// LoS excess attenuation, linear.
    pub mu_los: T,
    /// NLoS excess attenuation, linear.
    pub mu_nlos: T,
    /// Hz.
    pub carrier_freq: T,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: T,
    /// Total bandwidth `B`, Hz. Each CH/UAV gets `B / N`.
    pub total_bandwidth: T,
    /// Required per-link rate `R`, bit/s.
    pub rate_req: T,
}

impl<T: Scalar> Default for ChannelParams<T> {
    /// Table values with `B = 10 MHz` (see [`ChannelParams::literal_table`]).
    fn default() -> Self {
        Self {
            alpha_los: T::of(2.05),
            alpha_nlos: T::of(2.32),
            mu_los: T::of(10f64.powf(0.1)),
            mu_nlos: T::of(100.0),
            carrier_freq: T::of(2e9),
            noise_psd: T::of(dbm_to_watts(-174.0)),
            total_bandwidth: T::of(10e6),
            rate_req: T::of(4e6),
        }
    }
}

impl<T: Scalar> ChannelParams<T> {
    /// The published parameter set verbatim, including `B = 10 kHz`. With
    /// `R = 4 Mbps` this makes every link infeasible.
    pub fn literal_table() -> Self {
        Self { total_bandwidth: T::of(10e3), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams<T> {
    /// Battery energy of each UAV/CH, J.
    pub node_energy: T,
    /// Constant circuit power of each transmitter, W.
    pub circuit_power: T,
    /// Transmit power of each jammer, W.
    pub jammer_power: T,
}

impl<T: Scalar> Default for EnergyParams<T> {
    fn default() -> Self {
        Self { node_energy: T::of(20_000.0), circuit_power: T::of(0.1), jammer_power: T::of(dbm_to_watts(30.0)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints<T> {
    /// Leader altitude floor (upper corridor), m.
    pub h_min: T,
    /// Inter-UAV safety distance, m.
    pub d_min: T,
}

impl<T: Scalar> Default for Constraints<T> {
    fn default() -> Self {
        Self { h_min: T::of(70.0), d_min: T::of(5.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub nodes: Vec<Node<T>>,
    pub channel: ChannelParams<T>,
    pub energy: EnergyParams<T>,
    pub constraints: Constraints<T>,
}

impl<T: Scalar> Scenario<T> {
    pub fn new(nodes: Vec<Node<T>>) -> Self {
        Self {
            nodes,
            channel: ChannelParams::default(),
            energy: EnergyParams::default(),
            constraints: Constraints::default(),
        }
    }

    /// Indices of nodes with `role`, in roster order.
    pub fn indices_of(&self, role: NodeRole) -> Vec<usize> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.role == role).map(|(i, _)| i).collect()
    }

    pub fn count(&self, role: NodeRole) -> usize {
        self.nodes.iter().filter(|n| n.role == role).count()
    }

    pub fn leader_index(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.role == NodeRole::Leader)
    }

    pub fn jammer_positions(&self) -> Vec<Position3D<T>> {
        self.nodes.iter().filter(|n| n.role == NodeRole::Jammer).map(|n| n.pos).collect()
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    DuplicateId,
    MissingLeader,
    MultipleLeaders,
    MissingClusterHead,
    MissingGatheringUav,
    TerrestrialAltitude,
    NegativeAltitude,
    NonFinitePosition,
    NonPositiveWeight,
    ChannelParam,
    AlphaOrder,
    EnergyParam,
    ConstraintParam,
    CountMismatch,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::DuplicateId => "duplicate-id",
            ViolationCode::MissingLeader => "missing-leader",
            ViolationCode::MultipleLeaders => "multiple-leaders",
            ViolationCode::MissingClusterHead => "missing-cluster-head",
            ViolationCode::MissingGatheringUav => "missing-gathering-uav",
            ViolationCode::TerrestrialAltitude => "terrestrial-altitude",
            ViolationCode::NegativeAltitude => "negative-altitude",
            ViolationCode::NonFinitePosition => "non-finite-position",
            ViolationCode::NonPositiveWeight => "non-positive-weight",
            ViolationCode::ChannelParam => "channel-param",
            ViolationCode::AlphaOrder => "alpha-order",
            ViolationCode::EnergyParam => "energy-param",
            ViolationCode::ConstraintParam => "constraint-param",
            ViolationCode::CountMismatch => "count-mismatch",
        }
    }
}

/// One invariant violation. `field` names the offending parameter or node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { code, field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.code.as_str(), self.field, self.message)
    }
}

/// Returns every invariant violation of `scenario`; empty when valid.
pub fn validate<T: Scalar>(scenario: &Scenario<T>) -> Vec<Violation> {
    use ViolationCode as C;
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    for n in &scenario.nodes {
        if !seen.insert(n.id.as_str()) {
            out.push(Violation::new(C::DuplicateId, &n.id, format!("node id {:?} is used more than once", n.id)));
        }
    }

    match scenario.count(NodeRole::Leader) {
        0 => out.push(Violation::new(C::MissingLeader, "nodes", "scenario has no leader")),
        1 => {}
        k => out.push(Violation::new(C::MultipleLeaders, "nodes", format!("scenario has {k} leaders"))),
    }
    if scenario.count(NodeRole::ClusterHead) == 0 {
        out.push(Violation::new(C::MissingClusterHead, "nodes", "scenario has no cluster heads"));
    }
    if scenario.count(NodeRole::GatheringUav) == 0 {
        out.push(Violation::new(C::MissingGatheringUav, "nodes", "scenario has no gathering UAVs"));
    }

    for n in &scenario.nodes {
        if !n.pos.is_finite() {
            out.push(Violation::new(C::NonFinitePosition, &n.id, "position has a non-finite coordinate"));
            continue;
        }
        if n.role.is_terrestrial() && n.pos.z != T::zero() {
            out.push(Violation::new(
                C::TerrestrialAltitude,
                &n.id,
                format!("{} must be at z = 0, found z = {}", n.role, n.pos.z),
            ));
        } else if n.pos.z < T::zero() {
            out.push(Violation::new(C::NegativeAltitude, &n.id, format!("altitude {} is below ground", n.pos.z)));
        }
        if !(n.weight > T::zero() && n.weight.is_finite()) {
            out.push(Violation::new(C::NonPositiveWeight, &n.id, format!("node weight {} must be > 0", n.weight)));
        }
    }

    let ch = &scenario.channel;
    for (field, v) in [
        ("alpha_los", ch.alpha_los),
        ("alpha_nlos", ch.alpha_nlos),
        ("mu_los", ch.mu_los),
        ("mu_nlos", ch.mu_nlos),
        ("carrier_freq", ch.carrier_freq),
        ("noise_psd", ch.noise_psd),
        ("total_bandwidth", ch.total_bandwidth),
        ("rate_req", ch.rate_req),
    ] {
        if !(v > T::zero() && v.is_finite()) {
            out.push(Violation::new(C::ChannelParam, field, format!("{field} = {v} must be finite and > 0")));
        }
    }
    if ch.alpha_nlos < ch.alpha_los {
        out.push(Violation::new(
            C::AlphaOrder,
            "alpha_nlos",
            format!("alpha_nlos = {} is below alpha_los = {}", ch.alpha_nlos, ch.alpha_los),
        ));
    }

    let en = &scenario.energy;
    for (field, v, strict) in [
        ("node_energy", en.node_energy, true),
        ("circuit_power", en.circuit_power, true),
        ("jammer_power", en.jammer_power, false),
    ] {
        let ok = v.is_finite() && if strict { v > T::zero() } else { v >= T::zero() };
        if !ok {
            let bound = if strict { "> 0" } else { ">= 0" };
            out.push(Violation::new(C::EnergyParam, field, format!("{field} = {v} must be finite and {bound}")));
        }
    }

    let cs = &scenario.constraints;
    for (field, v) in [("h_min", cs.h_min), ("d_min", cs.d_min)] {
        if !(v > T::zero() && v.is_finite()) {
            out.push(Violation::new(C::ConstraintParam, field, format!("{field} = {v} must be finite and > 0")));
        }
    }

    out
}

/// [`validate`] plus the checks that depend on the edge policy.
pub fn validate_for_policy<T: Scalar>(scenario: &Scenario<T>, policy: EdgePolicy) -> Vec<Violation> {
    let mut out = validate(scenario);
    if policy == EdgePolicy::TwoHopPaired {
        let (m, n) = (scenario.count(NodeRole::ClusterHead), scenario.count(NodeRole::GatheringUav));
        if m != n {
            out.push(Violation::new(
                ViolationCode::CountMismatch,
                "nodes",
                format!("paired policy needs as many UAVs as cluster heads ({n} UAVs, {m} CHs)"),
            ));
        }
    }
    out
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
