//! Deterministic worst-case channel: path loss, jamming interference,
//! Shannon rate and the transmit power that meets a rate requirement.

use crate::error::{Error, Result};
use crate::model::{ChannelParams, EnergyParams, NodeRole, Position3D, Scenario};
use crate::scalar::{Scalar, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkType {
    /// Air-to-air, line of sight.
    A2A,
    /// Ground-to-air or air-to-ground, non line of sight.
    G2A,
}

impl LinkType {
    /// Both endpoints airborne gives A2A, anything touching the ground G2A.
    pub fn between(a: NodeRole, b: NodeRole) -> Self {
        if a.is_airborne() && b.is_airborne() {
            LinkType::A2A
        } else {
            LinkType::G2A
        }
    }

    pub fn exponent<T: Scalar>(self, channel: &ChannelParams<T>) -> T {
        match self {
            LinkType::A2A => channel.alpha_los,
            LinkType::G2A => channel.alpha_nlos,
        }
    }
}

/// `K_o = 4 pi f_c / c`, in 1/m.
pub fn carrier_wavenumber<T: Scalar>(channel: &ChannelParams<T>) -> T {
    T::of(4.0) * T::PI() * channel.carrier_freq / T::of(SPEED_OF_LIGHT)
}

/// Inverse path-loss coefficient `Gamma` of a link class.
pub fn inverse_pathloss<T: Scalar>(link: LinkType, channel: &ChannelParams<T>) -> T {
    let k = carrier_wavenumber(channel);
    let mu = match link {
        LinkType::A2A => channel.mu_los,
        LinkType::G2A => channel.mu_nlos,
    };
    T::one() / (k.powf(link.exponent(channel)) * mu)
}

/// Everything a link evaluation needs besides its two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkContext<T> {
    pub channel: ChannelParams<T>,
    pub energy: EnergyParams<T>,
    pub jammers: Vec<Position3D<T>>,
    /// Per-node FDMA bandwidth `B_p`, Hz.
    pub bandwidth: T,
    /// Rate each link has to sustain, bit/s.
    pub rate: T,
}

impl<T: Scalar> LinkContext<T> {
    /// Stage-1 links: rate `R` over `B_p = B / N` with `N` gathering UAVs.
    pub fn for_gathering(scenario: &Scenario<T>) -> Self {
        let n = scenario.count(NodeRole::GatheringUav).max(1);
        Self {
            channel: scenario.channel,
            energy: scenario.energy,
            jammers: scenario.jammer_positions(),
            bandwidth: scenario.channel.total_bandwidth / T::of_usize(n),
            rate: scenario.channel.rate_req,
        }
    }

    /// Backhaul links carry the aggregate `N * R` over the same `B_p`.
    pub fn for_backhaul(scenario: &Scenario<T>) -> Self {
        let n = scenario.count(NodeRole::GatheringUav).max(1);
        let mut ctx = Self::for_gathering(scenario);
        ctx.rate = ctx.rate * T::of_usize(n);
        ctx
    }

    /// Thermal noise `sigma^2` over the per-node band, W.
    pub fn noise_power(&self) -> T {
        self.channel.noise_psd * self.bandwidth
    }

    /// SNR needed for the rate requirement, `2^(R/B_p) - 1`. Infinite on overflow.
    pub fn snr_gap(&self) -> T {
        (self.rate / self.bandwidth).exp2() - T::one()
    }
}

/// Jamming power plus thermal noise at `rx`, W. Jammer links are always NLoS.
pub fn interference_plus_noise<T: Scalar>(rx: &Position3D<T>, ctx: &LinkContext<T>) -> Result<T> {
    let gamma = inverse_pathloss(LinkType::G2A, &ctx.channel);
    let alpha = ctx.channel.alpha_nlos;
    let mut total = ctx.noise_power();
    for j in &ctx.jammers {
        let d = rx.distance(j);
        if d == T::zero() {
            return Err(Error::JammerAtReceiver);
        }
        total = total + ctx.energy.jammer_power * gamma * d.powf(-alpha);
    }
    Ok(total)
}

/// Transmit power needed to meet the rate requirement. `Infeasible` stands in
/// for an overflowed power and maps to zero lifetime downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TxPower<T> {
    Feasible(T),
    Infeasible,
}

impl<T: Scalar> TxPower<T> {
    pub fn watts(self) -> Option<T> {
        match self {
            TxPower::Feasible(p) => Some(p),
            TxPower::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, TxPower::Feasible(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    pub link: LinkType,
    /// Inverse path-loss coefficient.
    pub gamma: T,
    /// Link length, m.
    pub distance: T,
    /// Interference plus noise at the receiver, W.
    pub interference_noise: T,
    pub required_power: TxPower<T>,
}

pub fn link_budget<T: Scalar>(
    tx: &Position3D<T>,
    rx: &Position3D<T>,
    link: LinkType,
    ctx: &LinkContext<T>,
) -> Result<LinkBudget<T>> {
    let distance = tx.distance(rx);
    if distance == T::zero() {
        return Err(Error::CoincidentPositions);
    }
    let gamma = inverse_pathloss(link, &ctx.channel);
    let interference_noise = interference_plus_noise(rx, ctx)?;
    let p = ctx.snr_gap() * interference_noise / gamma * distance.powf(link.exponent(&ctx.channel));
    let required_power = if p.is_finite() { TxPower::Feasible(p) } else { TxPower::Infeasible };
    Ok(LinkBudget { link, gamma, distance, interference_noise, required_power })
}

/// Transmit power at `tx` that delivers exactly the context rate at `rx`.
pub fn required_power<T: Scalar>(
    tx: &Position3D<T>,
    rx: &Position3D<T>,
    link: LinkType,
    ctx: &LinkContext<T>,
) -> Result<TxPower<T>> {
    link_budget(tx, rx, link, ctx).map(|b| b.required_power)
}

/// Shannon rate `B_p log2(1 + SINR)` achieved with `tx_power` watts.
pub fn achieved_rate<T: Scalar>(
    tx_power: T,
    tx: &Position3D<T>,
    rx: &Position3D<T>,
    link: LinkType,
    ctx: &LinkContext<T>,
) -> Result<T> {
    let d = tx.distance(rx);
    if d == T::zero() {
        return Err(Error::CoincidentPositions);
    }
    let gamma = inverse_pathloss(link, &ctx.channel);
    let sinr = tx_power * gamma * d.powf(-link.exponent(&ctx.channel)) / interference_plus_noise(rx, ctx)?;
    Ok(ctx.bandwidth * sinr.ln_1p() / T::LN_2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(jammers: Vec<Position3D<f64>>) -> LinkContext<f64> {
        LinkContext {
            channel: ChannelParams::default(),
            energy: EnergyParams::default(),
            jammers,
            bandwidth: 2e6,
            rate: 4e6,
        }
    }

    #[test]
    fn wavenumber_at_2ghz() {
        let k = carrier_wavenumber(&ChannelParams::<f64>::default());
        // 4 pi 2e9 / 299792458
        assert!((k - 83.833_800_878).abs() < 1e-8, "{k}");
    }

    #[test]
    fn equal_classes_give_equal_coefficients() {
        let mut ch = ChannelParams::<f64>::default();
        ch.alpha_nlos = ch.alpha_los;
        ch.mu_nlos = ch.mu_los;
        assert_eq!(inverse_pathloss(LinkType::A2A, &ch), inverse_pathloss(LinkType::G2A, &ch));
    }

    #[test]
    fn link_type_from_roles() {
        assert_eq!(LinkType::between(NodeRole::GatheringUav, NodeRole::Leader), LinkType::A2A);
        assert_eq!(LinkType::between(NodeRole::ClusterHead, NodeRole::GatheringUav), LinkType::G2A);
        assert_eq!(LinkType::between(NodeRole::BackhaulUav, NodeRole::BaseStation), LinkType::G2A);
    }

    #[test]
    fn no_jammers_is_pure_noise() {
        let c = ctx(vec![]);
        let v = interference_plus_noise(&Position3D::new(1.0, 2.0, 30.0), &c).unwrap();
        assert_eq!(v, c.noise_power());
    }

    #[test]
    fn inverse_square_jamming() {
        let mut c = ctx(vec![Position3D::ground(0.0, 0.0)]);
        c.channel.alpha_nlos = 2.0;
        c.channel.alpha_los = 2.0;
        let sigma = c.noise_power();
        let near = interference_plus_noise(&Position3D::new(0.0, 0.0, 10.0), &c).unwrap() - sigma;
        let far = interference_plus_noise(&Position3D::new(0.0, 0.0, 20.0), &c).unwrap() - sigma;
        assert!((near / far - 4.0).abs() < 1e-9);
    }

    #[test]
    fn jammer_on_receiver_is_an_error() {
        let c = ctx(vec![Position3D::ground(3.0, 4.0)]);
        assert!(matches!(interference_plus_noise(&Position3D::ground(3.0, 4.0), &c), Err(Error::JammerAtReceiver)));
    }

    #[test]
    fn zero_rate_needs_zero_power() {
        let mut c = ctx(vec![Position3D::ground(0.0, 0.0)]);
        c.rate = 0.0;
        let p = required_power(&Position3D::ground(5.0, 5.0), &Position3D::new(5.0, 5.0, 30.0), LinkType::G2A, &c);
        assert_eq!(p.unwrap(), TxPower::Feasible(0.0));
    }

    #[test]
    fn halving_distance_quarters_power() {
        let mut c = ctx(vec![Position3D::ground(-50.0, 0.0)]);
        c.channel.alpha_los = 2.0;
        let rx = Position3D::new(0.0, 0.0, 40.0);
        let far = required_power(&Position3D::new(20.0, 0.0, 40.0), &rx, LinkType::A2A, &c).unwrap();
        let near = required_power(&Position3D::new(10.0, 0.0, 40.0), &rx, LinkType::A2A, &c).unwrap();
        let ratio = far.watts().unwrap() / near.watts().unwrap();
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn literal_table_bandwidth_is_infeasible() {
        let mut c = ctx(vec![]);
        c.bandwidth = 10e3 / 5.0;
        let p = required_power(&Position3D::ground(0.0, 0.0), &Position3D::new(0.0, 0.0, 30.0), LinkType::G2A, &c);
        assert_eq!(p.unwrap(), TxPower::Infeasible);
    }

    #[test]
    fn rate_is_zero_without_power_and_increasing() {
        let c = ctx(vec![Position3D::ground(10.0, 0.0)]);
        let (tx, rx) = (Position3D::ground(0.0, 0.0), Position3D::new(0.0, 0.0, 20.0));
        assert_eq!(achieved_rate(0.0, &tx, &rx, LinkType::G2A, &c).unwrap(), 0.0);
        let r1 = achieved_rate(0.5, &tx, &rx, LinkType::G2A, &c).unwrap();
        let r2 = achieved_rate(0.6, &tx, &rx, LinkType::G2A, &c).unwrap();
        assert!(r2 > r1 && r1 > 0.0);
    }

    #[test]
    fn round_trip_single_precision() {
        let c = LinkContext::<f32> {
            channel: ChannelParams::default(),
            energy: EnergyParams::default(),
            jammers: vec![Position3D::ground(10.0, 0.0)],
            bandwidth: 2e6,
            rate: 4e6,
        };
        let (tx, rx) = (Position3D::ground(0.0f32, 0.0), Position3D::new(3.0f32, 0.0, 20.0));
        let p = required_power(&tx, &rx, LinkType::G2A, &c).unwrap().watts().unwrap();
        let r = achieved_rate(p, &tx, &rx, LinkType::G2A, &c).unwrap();
        assert!((r / c.rate - 1.0).abs() < 1e-5);
    }
}
