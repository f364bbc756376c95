//! Fixtures shared by the criterion benchmarks.

use hifie::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

/// `rows x cols` matrix of numerical rank about `rank`, with singular values
/// decaying geometrically past it.
pub fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Mat::from_fn(rows, rank, |_, _| rng.random::<f64>() - 0.5);
    let v = Mat::from_fn(rank, cols, |i, _| (rng.random::<f64>() - 0.5) * 0.5f64.powi(i as i32));
    Mat::from_fn(rows, cols, |i, j| (0..rank).map(|k| u[(i, k)] * v[(k, j)]).sum())
}
