//! Lifetime-maximizing placement of data-gathering UAVs under jamming.
//!
//! Link lifetimes under a worst-case jammed channel define a weighted flow
//! graph; UAV and leader positions climb the spatial gradient of the graph's
//! algebraic connectivity, a spectral proxy for the max-min link lifetime.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the simulator and CLI use throughout.

pub mod channel;
pub mod cli;
pub mod error;
pub mod gradient;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Position = model::Position3D<f64>;
pub type Node = model::Node<f64>;
pub type Scenario = model::Scenario<f64>;
pub type ChannelParams = model::ChannelParams<f64>;
pub type EnergyParams = model::EnergyParams<f64>;
pub type Constraints = model::Constraints<f64>;
pub type LinkContext = channel::LinkContext<f64>;
pub type LinkBudget = channel::LinkBudget<f64>;
pub type LifetimeGraph = graph::LifetimeGraph<f64>;
pub type SpectralResult = spectral::SpectralResult<f64>;
pub type PlacementGradient = gradient::PlacementGradient<f64>;
pub type Problem = objective::Problem<f64>;
pub type OptimizerConfig = optimizer::OptimizerConfig<f64>;
pub type OptimizerTrace = optimizer::OptimizerTrace<f64>;
pub type MonteCarloConfig = harness::MonteCarloConfig<f64>;
pub type ScenarioGenConfig = harness::ScenarioGenConfig<f64>;

pub type Matrix = linalg::SquareMatrix<f64>;
