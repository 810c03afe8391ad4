//! One evaluation of the placement objective: graph, spectrum and lifetime.

use crate::channel::LinkContext;
use crate::error::Result;
use crate::graph::{build_topology, network_lifetime, EdgePolicy, LifetimeGraph, Topology};
use crate::model::Scenario;
use crate::scalar::Scalar;
use crate::spectral::{graph_lambda2, SpectralResult};

/// Graph topology plus the link parameters it is evaluated with. Jammers are
/// static, so the context is fixed for the life of an optimization run.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub topology: Topology,
    pub ctx: LinkContext<T>,
}

#[derive(Debug, Clone)]
pub struct Evaluation<T> {
    pub graph: LifetimeGraph<T>,
    pub spectral: SpectralResult<T>,
    /// Minimum edge lifetime, s.
    pub lifetime: T,
}

impl<T: Scalar> Evaluation<T> {
    pub fn lambda2(&self) -> T {
        self.spectral.lambda2
    }
}

impl<T: Scalar> Problem<T> {
    pub fn gathering(scenario: &Scenario<T>, policy: EdgePolicy) -> Self {
        Self { topology: Topology::Gathering(policy), ctx: LinkContext::for_gathering(scenario) }
    }

    /// Backhaul chain; `stage1` supplies the `N * R` rate and `B / N` band.
    pub fn backhaul(stage1: &Scenario<T>) -> Self {
        Self { topology: Topology::BackhaulChain, ctx: LinkContext::for_backhaul(stage1) }
    }

    pub fn graph(&self, scenario: &Scenario<T>) -> Result<LifetimeGraph<T>> {
        build_topology(scenario, self.topology, &self.ctx)
    }

    pub fn evaluate(&self, scenario: &Scenario<T>) -> Result<Evaluation<T>> {
        let graph = self.graph(scenario)?;
        let spectral = graph_lambda2(&graph)?;
        let lifetime = network_lifetime(&graph);
        Ok(Evaluation { graph, spectral, lifetime })
    }
}
