//! Full-memory GMRES with optional preconditioning.

use super::LinearOperator;
use crate::error::{Error, Result};
use crate::scalar::{dotc, norm2, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrecondSide {
    /// Solve `M^{-1} A x = M^{-1} b`; residuals are measured after `M^{-1}`.
    #[default]
    Left,
    /// Solve `A M^{-1} y = b`, `x = M^{-1} y`.
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub maxit: usize,
    pub side: PrecondSide,
}

impl GmresOptions {
    pub fn new(tol: f64, maxit: usize) -> Self {
        Self {
            tol,
            maxit,
            side: PrecondSide::Left,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Relative residual before the first and after each iteration.
    pub residuals: Vec<f64>,
}

/// GMRES from a zero initial guess with a left preconditioner.
pub fn gmres<T: Scalar>(
    op: &dyn LinearOperator<T>,
    b: &[T],
    tol: f64,
    maxit: usize,
    precond: Option<&dyn Fn(&[T]) -> Vec<T>>,
) -> Result<GmresOutcome<T>> {
    gmres_with(op, b, GmresOptions::new(tol, maxit), precond)
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s, r)` with
/// `c a + s b = r`, `-conj(s) a + c b = 0`.
fn givens<T: Scalar>(a: T, b: T) -> (f64, T, T) {
    let (aa, bb) = (a.abs(), b.abs());
    if bb == 0.0 {
        return (1.0, T::zero(), a);
    }
    if aa == 0.0 {
        return (0.0, b.conj().scale(1.0 / bb), T::from_f64(bb));
    }
    let r = aa.hypot(bb);
    let phase = a.scale(1.0 / aa);
    (aa / r, phase * b.conj().scale(1.0 / r), phase.scale(r))
}

pub fn gmres_with<T: Scalar>(
    op: &dyn LinearOperator<T>,
    b: &[T],
    opts: GmresOptions,
    precond: Option<&dyn Fn(&[T]) -> Vec<T>>,
) -> Result<GmresOutcome<T>> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidSpec(format!("GMRES tolerance must be positive, got {}", opts.tol)));
    }
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let identity = |x: &[T]| x.to_vec();
    let m_inv: &dyn Fn(&[T]) -> Vec<T> = precond.unwrap_or(&identity);
    let left = opts.side == PrecondSide::Left;
    let matvec = |v: &[T]| -> Vec<T> {
        if left {
            m_inv(&op.apply(v))
        } else {
            op.apply(&m_inv(v))
        }
    };

    let r0 = if left { m_inv(b) } else { b.to_vec() };
    let beta = norm2(&r0);
    let mut residuals = vec![1.0];
    if beta == 0.0 {
        return Ok(GmresOutcome {
            x: vec![T::zero(); n],
            iterations: 0,
            residuals,
        });
    }

    let mut basis: Vec<Vec<T>> = vec![r0.iter().map(|v| v.scale(1.0 / beta)).collect()];
    // Columns of the rotated Hessenberg matrix (upper triangular part).
    let mut r_cols: Vec<Vec<T>> = Vec::new();
    let mut rotations: Vec<(f64, T)> = Vec::new();
    let mut g = vec![T::from_f64(beta)];
    let mut converged = false;

    for k in 0..opts.maxit {
        let mut w = matvec(&basis[k]);
        let mut h = vec![T::zero(); k + 2];
        // Modified Gram-Schmidt, two passes.
        for _ in 0..2 {
            for (j, v) in basis.iter().enumerate() {
                let coef = dotc(v, &w);
                h[j] += coef;
                w.iter_mut().zip(v).for_each(|(wi, &vi)| *wi -= coef * vi);
            }
        }
        let hnext = norm2(&w);
        h[k + 1] = T::from_f64(hnext);

        for (j, &(c, s)) in rotations.iter().enumerate() {
            let (a, bj) = (h[j], h[j + 1]);
            h[j] = a.scale(c) + s * bj;
            h[j + 1] = -(s.conj() * a) + bj.scale(c);
        }
        let (c, s, r) = givens(h[k], h[k + 1]);
        h[k] = r;
        h.truncate(k + 1);
        rotations.push((c, s));
        let gk = g[k];
        g[k] = gk.scale(c);
        g.push(-(s.conj() * gk));
        r_cols.push(h);

        let res = g[k + 1].abs() / beta;
        residuals.push(res);
        let breakdown = hnext <= 1e-14 * beta;
        if res <= opts.tol || breakdown {
            converged = true;
            break;
        }
        basis.push(w.iter().map(|v| v.scale(1.0 / hnext)).collect());
    }

    let k = r_cols.len();
    // Back substitution R y = g[..k].
    let mut y = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= r_cols[j][i] * y[j];
        }
        y[i] = s / r_cols[i][i];
    }
    let mut z = vec![T::zero(); n];
    for (yj, v) in y.iter().zip(&basis) {
        z.iter_mut().zip(v).for_each(|(zi, &vi)| *zi += *yj * vi);
    }
    let x = if left { z } else { m_inv(&z) };

    if !converged {
        return Err(Error::MaxIterationsExceeded {
            iterations: k,
            residual: *residuals.last().unwrap_or(&1.0),
            partial: x.iter().map(|v| v.to_c64()).collect(),
        });
    }
    Ok(GmresOutcome {
        x,
        iterations: k,
        residuals,
    })
}
