#![allow(dead_code)]

use abconv::Quadratic;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn vector(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| uniform(rng, -scale, scale))
}

/// Symmetric matrix with entries roughly in `[-scale, scale]`.
pub fn symmetric(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| uniform(rng, -scale, scale));
    (&m + m.transpose()) * 0.5
}

pub fn quadratic(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Quadratic {
    let a = symmetric(rng, dim, scale);
    let u = vector(rng, dim, scale);
    let c = uniform(rng, -scale, scale);
    Quadratic::new(a, u, c).expect("symmetric by construction")
}

pub fn isotropic(rng: &mut ChaCha8Rng, dim: usize, curvature: (f64, f64), scale: f64) -> Quadratic {
    let a = uniform(rng, curvature.0, curvature.1);
    Quadratic::isotropic(a, vector(rng, dim, scale), uniform(rng, -scale, scale))
}

pub fn lambda_min(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}

/// Relative agreement used by the oracle comparisons.
pub fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
