#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_lifetime::Matrix;

/// Random connected symmetric adjacency: a random spanning tree plus extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Matrix {
    let mut a = Matrix::zeros(n);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let w = rng.gen_range(0.1..10.0);
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[(i, j)] == 0.0 && rng.gen_bool(density) {
                let w = rng.gen_range(0.1..10.0);
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
    }
    a
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.5..2.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `W^{-1/2} (D - A) W^{-1/2}` built directly with nalgebra.
pub fn oracle_weighted_laplacian(a: &Matrix, w: &[f64]) -> DMatrix<f64> {
    let n = a.n();
    DMatrix::from_fn(n, n, |i, j| {
        let l = if i == j { (0..n).map(|k| a[(i, k)]).sum::<f64>() - a[(i, i)] } else { -a[(i, j)] };
        l / (w[i] * w[j]).sqrt()
    })
}

/// Ascending eigenvalues from nalgebra's symmetric solver.
pub fn oracle_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Weighted Cheeger constant by direct enumeration of every nonempty proper subset.
pub fn oracle_cheeger(a: &Matrix, w: &[f64]) -> f64 {
    let n = a.n();
    let total: f64 = w.iter().sum();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let inside = |i: usize| mask >> i & 1 == 1;
        let cut: f64 = (0..n)
            .filter(|&i| inside(i))
            .flat_map(|i| (0..n).filter(move |&j| !inside(j)).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)])
            .sum();
        let ws: f64 = (0..n).filter(|&i| inside(i)).map(|i| w[i]).sum();
        best = best.min(cut / ws.min(total - ws));
    }
    best
}
