//! Seeded random generators for property suites and sweeps.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{c, hermitize, ComplexMatrix, C64};
use super::state::{DensityMatrix, Ensemble};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    hermitize(&ginibre(rng, dim, dim))
}

/// `G G^dag / tr`, with `G` of shape `dim x rank`.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_noisy(m / c(tr, 0.0)).expect("Wishart sample is a valid state")
}

/// Ensemble of `n` random states with Dirichlet-like priors.
///
/// Ranks are drawn uniformly from `1..=dim`, so pure and rank-deficient
/// states appear alongside full-rank ones.
pub fn ensemble<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> Ensemble {
    let mut weights: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let drift = 1.0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    let states = (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=dim);
            density_matrix(rng, dim, rank)
        })
        .collect();
    Ensemble::new(weights, states).expect("random ensemble is valid")
}

/// Kraus operators of a random channel: blocks of a random isometry.
pub fn kraus_operators<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<ComplexMatrix> {
    let g = ginibre(rng, dim * count, dim);
    let q = g.qr().q();
    (0..count)
        .map(|k| q.rows(k * dim, dim).into_owned())
        .collect()
}
