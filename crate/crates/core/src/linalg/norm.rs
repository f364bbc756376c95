//! Spectral norm estimation by power iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::dense::{Mat, Op};
use crate::scalar::{norm2, Scalar};

/// Outcome of a power iteration on `M^* M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEstimate {
    /// Estimate of `‖M‖₂`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Uniform `[0, 1)` start vector from a fixed seed.
pub fn uniform_start<T: Scalar>(n: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| T::from_f64(rng.random::<f64>())).collect()
}

/// Power iteration for `‖M‖₂` with `M` given by its action and adjoint action.
///
/// Stops once two successive estimates agree to `tol` relative, or after
/// `maxit` iterations.
pub fn power_norm<T: Scalar>(
    n: usize,
    mut apply: impl FnMut(&[T]) -> Vec<T>,
    mut apply_adj: impl FnMut(&[T]) -> Vec<T>,
    tol: f64,
    maxit: usize,
    seed: u64,
) -> PowerEstimate {
    let zero = PowerEstimate {
        value: 0.0,
        iterations: 0,
        converged: true,
    };
    if n == 0 {
        return zero;
    }
    let mut v: Vec<T> = uniform_start(n, seed);
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x = x.scale(1.0 / nv));
    let mut prev = f64::NAN;
    let mut best = 0.0;
    for it in 1..=maxit {
        let w = apply(&v);
        let est = norm2(&w);
        if est == 0.0 {
            return PowerEstimate { iterations: it, ..zero };
        }
        best = est;
        if (est - prev).abs() <= tol * est {
            return PowerEstimate {
                value: est,
                iterations: it,
                converged: true,
            };
        }
        prev = est;
        let z = apply_adj(&w);
        let nz = norm2(&z);
        if nz == 0.0 {
            return PowerEstimate {
                value: est,
                iterations: it,
                converged: true,
            };
        }
        v = z.into_iter().map(|x| x.scale(1.0 / nz)).collect();
    }
    PowerEstimate {
        value: best,
        iterations: maxit,
        converged: false,
    }
}

/// `‖M‖₂` to about 1% (power iteration, at most 100 steps).
pub fn two_norm_estimate<T: Scalar>(m: &Mat<T>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    power_norm(
        m.cols(),
        |x| m.matvec(Op::N, x),
        |y| m.matvec(Op::C, y),
        1e-2,
        100,
        0x5eed,
    )
    .value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_empty() {
        assert_eq!(two_norm_estimate(&Mat::<f64>::zeros(4, 3)), 0.0);
        assert_eq!(two_norm_estimate(&Mat::<f64>::zeros(0, 3)), 0.0);
    }

    #[test]
    fn diagonal() {
        let m = Mat::diag(&[1.0, 5.0, 3.0]);
        let v = two_norm_estimate(&m);
        assert!((v - 5.0).abs() <= 0.1, "{v}");
    }

    #[test]
    fn rank_one() {
        let u = [1.0, -2.0, 0.5];
        let w = [3.0, 0.0, 4.0, 1.0];
        let m = Mat::from_fn(3, 4, |i, j| u[i] * w[j]);
        let exact = norm2(&u) * norm2(&w);
        assert!((two_norm_estimate(&m) - exact).abs() < 1e-12 * exact);
    }
}
