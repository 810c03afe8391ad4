mod common;

use common::*;
use rand::Rng;
use uav_lifetime::linalg::SquareMatrix;
use uav_lifetime::spectral::{
    cheeger_bounds, cheeger_constant, eigen_lambda2, laplacian_of, nontrivial_spectrum, weight_laplacian,
};

#[test]
fn lambda2_matches_independent_solver() {
    let mut r = rng(1);
    for _ in 0..300 {
        let n = r.gen_range(2..=12);
        let a = random_connected(&mut r, n, 0.3);
        let w = random_weights(&mut r, n);
        let lw = weight_laplacian(&laplacian_of(&a), &w);
        let ours = eigen_lambda2(&lw, &w).unwrap();
        let oracle = oracle_spectrum(&oracle_weighted_laplacian(&a, &w));
        let tol = 1e-9 * ours.spectral_scale;
        assert!((ours.lambda2 - oracle[1]).abs() <= tol, "n={n}: {} vs {}", ours.lambda2, oracle[1]);
        assert!(ours.residual <= tol, "residual {}", ours.residual);

        let norm: f64 = ours.fiedler.iter().map(|x| x * x).sum::<f64>().sqrt();
        let along: f64 = ours.fiedler.iter().zip(&w).map(|(x, wi)| x * wi.sqrt()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(along.abs() < 1e-10);

        let full = nontrivial_spectrum(&lw, &w).unwrap();
        for (k, v) in full.values.iter().enumerate() {
            assert!((v - oracle[k + 1]).abs() <= tol);
        }
    }
}

#[test]
fn cheeger_matches_enumeration_and_bounds_hold() {
    let mut r = rng(2);
    for _ in 0..200 {
        let n = r.gen_range(2..=10);
        let a = random_connected(&mut r, n, 0.4);
        let w = if r.gen_bool(0.5) { vec![1.0; n] } else { random_weights(&mut r, n) };
        let cut = cheeger_constant(&a, &w).unwrap();
        let h = oracle_cheeger(&a, &w);
        assert!((cut.value - h).abs() <= 1e-12 * h, "{} vs {h}", cut.value);
        let b = cheeger_bounds(&a, &weight_laplacian(&laplacian_of(&a), &w), &w).unwrap();
        assert!(b.ok, "{b:?}");
    }
}

#[test]
fn edge_scaling_is_linear() {
    let mut r = rng(3);
    for _ in 0..50 {
        let n = r.gen_range(3..=9);
        let a = random_connected(&mut r, n, 0.3);
        let w = random_weights(&mut r, n);
        let c = r.gen_range(0.01..100.0);
        let mut scaled = a.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= c;
            }
        }
        let l1 = eigen_lambda2(&weight_laplacian(&laplacian_of(&a), &w), &w).unwrap().lambda2;
        let l2 = eigen_lambda2(&weight_laplacian(&laplacian_of(&scaled), &w), &w).unwrap().lambda2;
        assert!((l2 - c * l1).abs() <= 1e-9 * c * l1);
        let h1 = cheeger_constant(&a, &w).unwrap().value;
        let h2 = cheeger_constant(&scaled, &w).unwrap().value;
        assert!((h2 - c * h1).abs() <= 1e-9 * c * h1);
    }
}

#[test]
fn path_graph_spectrum_is_exact() {
    let a = SquareMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]);
    let lw = laplacian_of(&a);
    let s = nontrivial_spectrum(&lw, &[1.0f64; 3]).unwrap();
    assert!((s.values[0] - 1.0).abs() < 1e-10);
    assert!((s.values[1] - 3.0).abs() < 1e-10);
}

#[test]
fn single_precision_agrees() {
    let mut r = rng(4);
    for _ in 0..20 {
        let n = r.gen_range(3..=8);
        let a = random_connected(&mut r, n, 0.3);
        let w = random_weights(&mut r, n);
        let l64 = eigen_lambda2(&weight_laplacian(&laplacian_of(&a), &w), &w).unwrap().lambda2;
        let a32 =
            SquareMatrix::from_rows(&(0..n).map(|i| a.row(i).iter().map(|&v| v as f32).collect()).collect::<Vec<_>>());
        let w32: Vec<f32> = w.iter().map(|&v| v as f32).collect();
        let l32 = eigen_lambda2(&weight_laplacian(&laplacian_of(&a32), &w32), &w32).unwrap().lambda2;
        assert!((l32 as f64 - l64).abs() <= 1e-4 * l64.max(1.0));
    }
}
