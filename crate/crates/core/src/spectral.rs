//! Algebraic connectivity, Fiedler vector and the weighted Cheeger constant.

use crate::error::{Error, Result};
use crate::graph::LifetimeGraph;
use crate::linalg::{symmetric_eigen, SquareMatrix, SymmetricEigen};
use crate::scalar::Scalar;

/// Second-smallest eigenpair of a weighted Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult<T> {
    pub lambda2: T,
    /// Unit norm, orthogonal to `W^{1/2} 1`, first nonzero entry positive.
    pub fiedler: Vec<T>,
    /// `||L_W x - lambda2 x||`.
    pub residual: T,
    /// `lambda3 - lambda2`; infinite for two nodes.
    pub multiplicity_gap: T,
    /// Infinity norm of `L_W`, an upper bound on its spectrum.
    pub spectral_scale: T,
    /// `lambda2` is (numerically) repeated, so the Fiedler vector is not unique.
    pub degenerate: bool,
}

/// Relative gap below which `lambda2` counts as repeated.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `lambda2` of `weighted_laplacian` restricted to the complement of its
/// kernel vector `W^{1/2} 1`.
///
/// The kernel direction is shifted above the spectrum before a full Jacobi
/// decomposition, so the smallest remaining eigenpair is the Fiedler pair
/// even when the graph is disconnected.
pub fn eigen_lambda2<T: Scalar>(weighted_laplacian: &SquareMatrix<T>, node_weights: &[T]) -> Result<SpectralResult<T>> {
    let n = weighted_laplacian.n();
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    if node_weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: node_weights.len() });
    }
    let deviation = weighted_laplacian.max_asymmetry();
    let tolerance = T::structural_tol() * weighted_laplacian.max_abs();
    if deviation > tolerance {
        return Err(Error::Asymmetric { deviation: deviation.as_f64(), tolerance: tolerance.as_f64() });
    }

    let (eig, kernel, scale) = shifted_eigen(weighted_laplacian, node_weights)?;

    let mut x = deflate(eig.vectors.column(0), &kernel);
    normalize_sign(&mut x);

    let lx = weighted_laplacian.mul_vec(&x);
    let lambda2 = dot(&x, &lx);
    let residual = lx.iter().zip(&x).map(|(&a, &b)| (a - lambda2 * b) * (a - lambda2 * b)).sum::<T>().sqrt();
    let multiplicity_gap = if n > 2 { eig.values[1] - eig.values[0] } else { T::infinity() };
    let degenerate = multiplicity_gap < T::of(DEGENERACY_TOL) * scale;

    Ok(SpectralResult { lambda2, fiedler: x, residual, multiplicity_gap, spectral_scale: scale, degenerate })
}

// Decomposes L_W + shift * u0 u0^T with the kernel vector u0 = W^{1/2} 1 / |.|
// pushed above the rest of the spectrum.
fn shifted_eigen<T: Scalar>(
    weighted_laplacian: &SquareMatrix<T>,
    node_weights: &[T],
) -> Result<(SymmetricEigen<T>, Vec<T>, T)> {
    let n = weighted_laplacian.n();
    let sqrt_w: Vec<T> = node_weights.iter().map(|w| w.sqrt()).collect();
    let norm = dot(&sqrt_w, &sqrt_w).sqrt();
    let kernel: Vec<T> = sqrt_w.iter().map(|&v| v / norm).collect();

    let scale = weighted_laplacian.inf_norm();
    let shift = if scale > T::zero() { scale * T::of(2.0) } else { T::one() };
    let mut shifted = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let sym = (weighted_laplacian[(i, j)] + weighted_laplacian[(j, i)]) * T::of(0.5);
            let v = sym + shift * kernel[i] * kernel[j];
            shifted[(i, j)] = v;
            shifted[(j, i)] = v;
        }
    }
    Ok((symmetric_eigen(&shifted)?, kernel, scale))
}

// Removes the kernel component and rescales to unit norm.
fn deflate<T: Scalar>(mut x: Vec<T>, kernel: &[T]) -> Vec<T> {
    let along = dot(&x, kernel);
    for (xi, &ki) in x.iter_mut().zip(kernel) {
        *xi = *xi - along * ki;
    }
    let xn = dot(&x, &x).sqrt();
    for xi in x.iter_mut() {
        *xi = *xi / xn;
    }
    x
}

/// The `n - 1` eigenpairs of `L_W` orthogonal to its kernel vector, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

pub fn nontrivial_spectrum<T: Scalar>(weighted_laplacian: &SquareMatrix<T>, node_weights: &[T]) -> Result<Spectrum<T>> {
    let n = weighted_laplacian.n();
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    if node_weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: node_weights.len() });
    }
    let (eig, kernel, _) = shifted_eigen(weighted_laplacian, node_weights)?;
    let vectors: Vec<Vec<T>> = (0..n - 1)
        .map(|k| {
            let mut v = deflate(eig.vectors.column(k), &kernel);
            normalize_sign(&mut v);
            v
        })
        .collect();
    let values = vectors.iter().map(|v| dot(v, &weighted_laplacian.mul_vec(v))).collect();
    Ok(Spectrum { values, vectors })
}

/// `eigen_lambda2` of a graph's weighted Laplacian.
pub fn graph_lambda2<T: Scalar>(graph: &LifetimeGraph<T>) -> Result<SpectralResult<T>> {
    eigen_lambda2(&graph.weighted_laplacian, &graph.node_weights)
}

fn normalize_sign<T: Scalar>(x: &mut [T]) {
    let cutoff = x.iter().fold(T::zero(), |m, v| m.max(v.abs())) * T::of(1e-10);
    if let Some(first) = x.iter().find(|v| v.abs() > cutoff) {
        if *first < T::zero() {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Largest node count accepted by exhaustive Cheeger enumeration.
pub const MAX_CHEEGER_NODES: usize = 20;

/// Minimizing bipartition of the weighted Cheeger constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CheegerCut<T> {
    pub value: T,
    /// The side containing node 0, ascending.
    pub subset: Vec<usize>,
}

/// Exact weighted Cheeger constant over all `2^(n-1) - 1` bipartitions of a
/// symmetric adjacency. Ties go to the lexicographically smallest subset.
pub fn cheeger_constant<T: Scalar>(adjacency: &SquareMatrix<T>, node_weights: &[T]) -> Result<CheegerCut<T>> {
    let n = adjacency.n();
    if n > MAX_CHEEGER_NODES {
        return Err(Error::TooManyNodes { n, max: MAX_CHEEGER_NODES });
    }
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    if node_weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: node_weights.len() });
    }
    let total: T = node_weights.iter().copied().sum();
    let full = (1u32 << (n - 1)) - 1;
    let mut best: Option<(T, u32)> = None;
    for rest in 0..full {
        // bit k of `rest` puts node k + 1 in S; node 0 is always in S
        let mask = (rest << 1) | 1;
        let mut cut = T::zero();
        let mut w_s = T::zero();
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            w_s = w_s + node_weights[i];
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    cut = cut + adjacency[(i, j)];
                }
            }
        }
        let value = cut / w_s.min(total - w_s);
        best = match best {
            None => Some((value, mask)),
            Some((bv, bm)) if value < bv || (value == bv && lex_less(mask, bm, n)) => Some((value, mask)),
            keep => keep,
        };
    }
    let (value, mask) = best.expect("at least one bipartition");
    Ok(CheegerCut { value, subset: (0..n).filter(|i| mask & (1 << i) != 0).collect() })
}

// Lexicographic order of the ascending index lists encoded by two masks.
fn lex_less(a: u32, b: u32, n: usize) -> bool {
    let (la, lb): (Vec<usize>, Vec<usize>) =
        ((0..n).filter(|i| a & (1 << i) != 0).collect(), (0..n).filter(|i| b & (1 << i) != 0).collect());
    la < lb
}

pub fn cheeger_exact<T: Scalar>(graph: &LifetimeGraph<T>) -> Result<CheegerCut<T>> {
    cheeger_constant(&graph.symmetric, &graph.node_weights)
}

/// Both sides of the weighted Cheeger inequality for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CheegerBounds<T> {
    /// `lambda2 / 2`.
    pub lower: T,
    pub cheeger: T,
    /// `sqrt(2 delta_max lambda2 / w_min)`.
    pub upper: T,
    pub lambda2: T,
    pub ok: bool,
}

/// Evaluates `lambda2/2 <= h_W <= sqrt(2 delta_max lambda2 / w_min)` with a
/// `1e-9` relative slack. `delta_max` is the largest generalized degree.
pub fn cheeger_bounds<T: Scalar>(
    adjacency: &SquareMatrix<T>,
    weighted_laplacian: &SquareMatrix<T>,
    node_weights: &[T],
) -> Result<CheegerBounds<T>> {
    let cut = cheeger_constant(adjacency, node_weights)?;
    let spec = eigen_lambda2(weighted_laplacian, node_weights)?;
    let n = adjacency.n();
    let delta_max = (0..n).map(|i| adjacency.row(i).iter().copied().sum::<T>()).fold(T::zero(), T::max);
    let w_min = node_weights.iter().copied().fold(T::infinity(), T::min);
    let lambda2 = spec.lambda2.max(T::zero());
    let lower = lambda2 / T::of(2.0);
    let upper = (T::of(2.0) * delta_max * lambda2 / w_min).sqrt();
    let eps = T::of(1e-9) * cut.value.max(upper).max(T::min_positive_value());
    let ok = lower - eps <= cut.value && cut.value <= upper + eps;
    Ok(CheegerBounds { lower, cheeger: cut.value, upper, lambda2: spec.lambda2, ok })
}

pub fn cheeger_bounds_check<T: Scalar>(graph: &LifetimeGraph<T>) -> Result<CheegerBounds<T>> {
    cheeger_bounds(&graph.symmetric, &graph.weighted_laplacian, &graph.node_weights)
}

/// `D - A` for a symmetric adjacency.
pub fn laplacian_of<T: Scalar>(adjacency: &SquareMatrix<T>) -> SquareMatrix<T> {
    let n = adjacency.n();
    let mut l = SquareMatrix::zeros(n);
    for i in 0..n {
        let mut deg = T::zero();
        for j in 0..n {
            if i != j {
                l[(i, j)] = -adjacency[(i, j)];
                deg = deg + adjacency[(i, j)];
            }
        }
        l[(i, i)] = deg;
    }
    l
}

/// `W^{-1/2} L W^{-1/2}`.
pub fn weight_laplacian<T: Scalar>(laplacian: &SquareMatrix<T>, node_weights: &[T]) -> SquareMatrix<T> {
    let n = laplacian.n();
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = laplacian[(i, j)] / (node_weights[i] * node_weights[j]).sqrt();
        }
    }
    out
}
