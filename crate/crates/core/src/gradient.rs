//! Spatial gradient of the algebraic connectivity.
//!
//! With `x` the unit Fiedler vector of `L_W`,
//! `d lambda2 / d theta = sum_{p~q} (x_p/sqrt(w_p) - x_q/sqrt(w_q))^2 d a_sym_pq / d theta`,
//! and each directed edge contributes half its weight to `a_sym`. Edge-weight
//! partials come from differentiating `E / (P + P_c)` through the required
//! power, including the jamming term at the receiver.

use crate::channel::{interference_plus_noise, inverse_pathloss, LinkContext, LinkType};
use crate::error::Result;
use crate::graph::LifetimeGraph;
use crate::model::{Axis, Position3D, Scenario};
use crate::objective::Problem;
use crate::scalar::Scalar;
use crate::spectral::SpectralResult;

/// Partial derivatives of one edge weight with respect to its endpoints, s/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePartials<T> {
    pub tx: [T; 3],
    pub rx: [T; 3],
}

/// `d a_pq / d (tx, rx)` for every axis. Zero for an infeasible link.
pub fn edge_weight_partials<T: Scalar>(
    tx: &Position3D<T>,
    rx: &Position3D<T>,
    link: LinkType,
    ctx: &LinkContext<T>,
) -> Result<EdgePartials<T>> {
    let zero = EdgePartials { tx: [T::zero(); 3], rx: [T::zero(); 3] };
    let d = tx.distance(rx);
    if d == T::zero() {
        return Err(crate::error::Error::CoincidentPositions);
    }
    let alpha = link.exponent(&ctx.channel);
    let gamma = inverse_pathloss(link, &ctx.channel);
    let gap = ctx.snr_gap();
    let interference = interference_plus_noise(rx, ctx)?;
    let power = gap * interference / gamma * d.powf(alpha);
    if !power.is_finite() {
        return Ok(zero);
    }
    let denom = power + ctx.energy.circuit_power;
    // d a / d P
    let da_dp = -ctx.energy.node_energy / (denom * denom);

    let gamma_j = inverse_pathloss(LinkType::G2A, &ctx.channel);
    let alpha_j = ctx.channel.alpha_nlos;
    let d_alpha = d.powf(alpha);
    let d_alpha_m2 = d.powf(alpha - T::of(2.0));

    let mut out = zero;
    for axis in Axis::ALL {
        let k = axis.index();
        let delta = tx.coord(axis) - rx.coord(axis);
        // d P / d tx_k through d^alpha only
        let dp_dtx = gap * interference / gamma * alpha * d_alpha_m2 * delta;
        // d I / d rx_k from each jammer distance
        let mut di_drx = T::zero();
        for j in &ctx.jammers {
            let dj = rx.distance(j);
            di_drx = di_drx
                - ctx.energy.jammer_power
                    * gamma_j
                    * alpha_j
                    * dj.powf(-alpha_j - T::of(2.0))
                    * (rx.coord(axis) - j.coord(axis));
        }
        let dp_drx = gap / gamma * (di_drx * d_alpha - interference * alpha * d_alpha_m2 * delta);
        out.tx[k] = da_dp * dp_dtx;
        out.rx[k] = da_dp * dp_drx;
    }
    Ok(out)
}

/// Gradient of `lambda2` per scenario node; rows of immovable nodes are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementGradient<T> {
    pub partials: Vec<[T; 3]>,
    pub movable: Vec<bool>,
    /// Inherited from the spectral result the gradient was built from.
    pub degenerate: bool,
}

impl<T: Scalar> PlacementGradient<T> {
    fn zeros(n: usize, movable: &[usize]) -> Self {
        let mut mask = vec![false; n];
        for &m in movable {
            mask[m] = true;
        }
        Self { partials: vec![[T::zero(); 3]; n], movable: mask, degenerate: false }
    }

    pub fn get(&self, node: usize, axis: Axis) -> T {
        self.partials[node][axis.index()]
    }

    /// Largest absolute component over movable coordinates.
    pub fn inf_norm(&self) -> T {
        self.partials
            .iter()
            .zip(&self.movable)
            .filter(|(_, &m)| m)
            .flat_map(|(p, _)| p.iter())
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// `(node, axis, value)` for every movable coordinate.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Axis, T)> + '_ {
        self.partials
            .iter()
            .enumerate()
            .filter(|(i, _)| self.movable[*i])
            .flat_map(|(i, p)| Axis::ALL.into_iter().map(move |a| (i, a, p[a.index()])))
    }
}

/// Analytic `d lambda2 / d position` over the `movable` scenario nodes.
pub fn lambda2_gradient<T: Scalar>(
    scenario: &Scenario<T>,
    graph: &LifetimeGraph<T>,
    spectral: &SpectralResult<T>,
    movable: &[usize],
    ctx: &LinkContext<T>,
) -> Result<PlacementGradient<T>> {
    let mut grad = eigenvalue_gradient(scenario, graph, &spectral.fiedler, movable, ctx)?;
    grad.degenerate = spectral.degenerate;
    Ok(grad)
}

/// Gradient of the simple eigenvalue of `L_W` whose unit eigenvector is `vector`.
pub fn eigenvalue_gradient<T: Scalar>(
    scenario: &Scenario<T>,
    graph: &LifetimeGraph<T>,
    vector: &[T],
    movable: &[usize],
    ctx: &LinkContext<T>,
) -> Result<PlacementGradient<T>> {
    let mut grad = PlacementGradient::zeros(scenario.nodes.len(), movable);
    let scaled: Vec<T> = vector.iter().zip(&graph.node_weights).map(|(&x, &w)| x / w.sqrt()).collect();
    let half = T::of(0.5);
    for e in &graph.edges {
        if e.weight == T::zero() {
            continue;
        }
        let (s_tx, s_rx) = (graph.members[e.tx], graph.members[e.rx]);
        let (move_tx, move_rx) = (grad.movable[s_tx], grad.movable[s_rx]);
        if !move_tx && !move_rx {
            continue;
        }
        let diff = scaled[e.tx] - scaled[e.rx];
        let coeff = half * diff * diff;
        let parts = edge_weight_partials(&scenario.nodes[s_tx].pos, &scenario.nodes[s_rx].pos, e.budget.link, ctx)?;
        for k in 0..3 {
            if move_tx {
                grad.partials[s_tx][k] = grad.partials[s_tx][k] + coeff * parts.tx[k];
            }
            if move_rx {
                grad.partials[s_rx][k] = grad.partials[s_rx][k] + coeff * parts.rx[k];
            }
        }
    }
    Ok(grad)
}

/// Minimum-norm point of the convex hull of `gradients`, all over the same
/// movable set. When nonzero it has a positive inner product with every input,
/// so it raises all of the corresponding eigenvalues at once.
pub fn min_norm_combination<T: Scalar>(gradients: &[PlacementGradient<T>]) -> PlacementGradient<T> {
    assert!(!gradients.is_empty(), "need at least one gradient");
    let k = gradients.len();
    let flat: Vec<Vec<f64>> =
        gradients.iter().map(|g| g.partials.iter().flat_map(|p| p.iter().map(|v| v.as_f64())).collect()).collect();
    let gram: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| flat[i].iter().zip(&flat[j]).map(|(a, b)| a * b).sum()).collect()).collect();

    // Frank-Wolfe on the simplex with exact line search.
    let mut lam = vec![0.0; k];
    let start = (0..k).min_by(|&a, &b| gram[a][a].total_cmp(&gram[b][b])).unwrap();
    lam[start] = 1.0;
    for _ in 0..1000 {
        let q: Vec<f64> = (0..k).map(|i| (0..k).map(|j| gram[i][j] * lam[j]).sum()).collect();
        let norm2: f64 = lam.iter().zip(&q).map(|(l, q)| l * q).sum();
        let s = (0..k).min_by(|&a, &b| q[a].total_cmp(&q[b])).unwrap();
        // gap of the linearization; zero at the optimum
        if norm2 - q[s] <= 1e-15 * norm2.max(f64::MIN_POSITIVE) {
            break;
        }
        // minimize |(1-t) p + t g_s|^2 over t in [0, 1]
        let denom = norm2 - 2.0 * q[s] + gram[s][s];
        let t = if denom > 0.0 { ((norm2 - q[s]) / denom).clamp(0.0, 1.0) } else { 1.0 };
        for l in lam.iter_mut() {
            *l *= 1.0 - t;
        }
        lam[s] += t;
    }

    let mut out = gradients[0].clone();
    out.degenerate = gradients.iter().any(|g| g.degenerate);
    for (node, row) in out.partials.iter_mut().enumerate() {
        for (k_axis, v) in row.iter_mut().enumerate() {
            *v = gradients.iter().zip(&lam).fold(T::zero(), |acc, (g, &l)| acc + T::of(l) * g.partials[node][k_axis]);
        }
    }
    out
}

/// Central finite-difference gradient of `lambda2` with full graph rebuilds.
#[derive(Debug, Clone)]
pub struct FdGradient<T> {
    pub gradient: PlacementGradient<T>,
    /// False when `lambda2` is repeated at the base point.
    pub reliable: bool,
}

pub fn fd_gradient_oracle<T: Scalar>(
    scenario: &Scenario<T>,
    problem: &Problem<T>,
    movable: &[usize],
    step: T,
) -> Result<FdGradient<T>> {
    let base = problem.evaluate(scenario)?;
    let mut grad = PlacementGradient::zeros(scenario.nodes.len(), movable);
    grad.degenerate = base.spectral.degenerate;
    let mut probe = scenario.clone();
    for &node in movable {
        for axis in Axis::ALL {
            let orig = scenario.nodes[node].pos.coord(axis);
            *probe.nodes[node].pos.coord_mut(axis) = orig + step;
            let up = problem.evaluate(&probe)?.lambda2();
            *probe.nodes[node].pos.coord_mut(axis) = orig - step;
            let down = problem.evaluate(&probe)?.lambda2();
            *probe.nodes[node].pos.coord_mut(axis) = orig;
            grad.partials[node][axis.index()] = (up - down) / (T::of(2.0) * step);
        }
    }
    Ok(FdGradient { reliable: !base.spectral.degenerate, gradient: grad })
}

/// Per-coordinate agreement threshold between analytic and FD gradients.
pub const GRADIENT_REL_TOL: f64 = 1e-4;
/// Absolute error always accepted, regardless of the oracle's magnitude.
pub const GRADIENT_ABS_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientComparison {
    /// Max over coordinates of `|a - o| / max(|o|, floor / tol)`.
    pub max_rel_error: f64,
    pub worst: Option<(usize, Axis)>,
}

impl GradientComparison {
    pub fn passes(&self) -> bool {
        self.max_rel_error <= GRADIENT_REL_TOL
    }
}

/// Relative error per movable coordinate; a coordinate passes when
/// `|a - o| <= max(1e-4 |o|, 1e-8)`.
pub fn compare_gradients<T: Scalar>(
    analytic: &PlacementGradient<T>,
    oracle: &PlacementGradient<T>,
) -> GradientComparison {
    let floor = GRADIENT_ABS_FLOOR / GRADIENT_REL_TOL;
    let mut out = GradientComparison { max_rel_error: 0.0, worst: None };
    for (node, axis, o) in oracle.entries() {
        let a = analytic.get(node, axis).as_f64();
        let o = o.as_f64();
        let e = (a - o).abs() / o.abs().max(floor);
        if out.worst.is_none() || e > out.max_rel_error {
            out = GradientComparison { max_rel_error: e, worst: Some((node, axis)) };
        }
    }
    out
}
