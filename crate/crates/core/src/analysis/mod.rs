//! Reference operators, error estimators and GMRES.

mod fft;
mod gmres;

pub use fft::{fft_matvec_operator, FftOperator};
pub use gmres::{gmres, gmres_with, GmresOptions, GmresOutcome, PrecondSide};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::Factorization;
use crate::linalg::{power_norm, Mat, Op};
use crate::problem::{EntryGenerator, KernelProblem};
use crate::scalar::Scalar;

/// Largest problem the on-the-fly dense operator accepts by default.
pub const DENSE_CAP: usize = 65536;

pub const POWER_TOL: f64 = 1e-2;
pub const POWER_MAXIT: usize = 300;
pub const POWER_SEED: u64 = 0x00e5_71a7_e5ee_d5ee;

/// A square linear map with its adjoint.
pub trait LinearOperator<T>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T]) -> Vec<T>;
    fn apply_adjoint(&self, x: &[T]) -> Vec<T>;
    fn label(&self) -> &str {
        "operator"
    }
}

impl<T: Scalar> LinearOperator<T> for Mat<T> {
    fn dim(&self) -> usize {
        assert_eq!(self.rows(), self.cols());
        self.rows()
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        self.matvec(Op::N, x)
    }

    fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        self.matvec(Op::C, x)
    }

    fn label(&self) -> &str {
        "dense matrix"
    }
}

/// `F` as an operator. Inputs of the wrong length panic.
impl<T: Scalar> LinearOperator<T> for Factorization<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        Factorization::apply(self, x).expect("operator length")
    }

    fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        Factorization::apply_adjoint(self, x).expect("operator length")
    }

    fn label(&self) -> &str {
        self.scheme.name()
    }
}

/// `F^{-1}` as an operator.
pub struct InverseOperator<'a, T>(pub &'a Factorization<T>);

impl<T: Scalar> LinearOperator<T> for InverseOperator<'_, T> {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        self.0.solve(x).expect("operator length")
    }

    fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        self.0.solve_adjoint(x).expect("operator length")
    }

    fn label(&self) -> &str {
        "inverse"
    }
}

/// An operator from a pair of closures.
pub struct FnOperator<F, G> {
    pub n: usize,
    pub apply: F,
    pub apply_adjoint: G,
    pub label: String,
}

impl<T, F, G> LinearOperator<T> for FnOperator<F, G>
where
    F: Fn(&[T]) -> Vec<T> + Sync,
    G: Fn(&[T]) -> Vec<T> + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        (self.apply)(x)
    }

    fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        (self.apply_adjoint)(x)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Exact `A x` generating every entry on demand.
pub struct DenseOperator<'a, T> {
    problem: &'a KernelProblem<T>,
}

pub fn dense_matvec_operator<T: Scalar>(problem: &KernelProblem<T>) -> Result<DenseOperator<'_, T>> {
    dense_matvec_operator_with_cap(problem, DENSE_CAP)
}

pub fn dense_matvec_operator_with_cap<T: Scalar>(problem: &KernelProblem<T>, cap: usize) -> Result<DenseOperator<'_, T>> {
    let n = problem.n();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(DenseOperator { problem })
}

impl<T: Scalar> DenseOperator<'_, T> {
    /// The full matrix.
    pub fn to_matrix(&self) -> Mat<T> {
        let n = self.problem.n();
        let cols: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|j| (0..n).map(|i| self.problem.entry(i, j)).collect())
            .collect();
        Mat::from_col_major(n, n, cols.concat())
    }
}

impl<T: Scalar> LinearOperator<T> for DenseOperator<'_, T> {
    fn dim(&self) -> usize {
        self.problem.n()
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.problem.entry(i, j) * x[j]).sum())
            .collect()
    }

    fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .into_par_iter()
            .map(|j| (0..n).map(|i| self.problem.entry(i, j).conj() * x[i]).sum())
            .collect()
    }

    fn label(&self) -> &str {
        "dense"
    }
}

/// A power-iteration norm estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: POWER_TOL,
            maxit: POWER_MAXIT,
            seed: POWER_SEED,
        }
    }
}

fn check_dims<T>(a: &dyn LinearOperator<T>, b: &dyn LinearOperator<T>) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.dim())
}

fn sub<T: Scalar>(mut a: Vec<T>, b: &[T]) -> Vec<T> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= *y);
    a
}

/// `‖A‖₂` by power iteration.
pub fn estimate_norm<T: Scalar>(op: &dyn LinearOperator<T>, opts: PowerOptions) -> ErrorEstimate {
    let e = power_norm(op.dim(), |x| op.apply(x), |y| op.apply_adjoint(y), opts.tol, opts.maxit, opts.seed);
    ErrorEstimate {
        value: e.value,
        iterations: e.iterations,
        converged: e.converged,
    }
}

/// `e_a = ‖A - F‖ / ‖A‖`.
pub fn estimate_forward_error<T: Scalar>(op_a: &dyn LinearOperator<T>, f: &dyn LinearOperator<T>) -> Result<ErrorEstimate> {
    estimate_forward_error_with(op_a, f, PowerOptions::default())
}

pub fn estimate_forward_error_with<T: Scalar>(
    op_a: &dyn LinearOperator<T>,
    f: &dyn LinearOperator<T>,
    opts: PowerOptions,
) -> Result<ErrorEstimate> {
    let n = check_dims(op_a, f)?;
    let diff = power_norm(
        n,
        |x| sub(op_a.apply(x), &f.apply(x)),
        |y| sub(op_a.apply_adjoint(y), &f.apply_adjoint(y)),
        opts.tol,
        opts.maxit,
        opts.seed,
    );
    let norm = estimate_norm(op_a, opts);
    Ok(ErrorEstimate {
        value: if norm.value > 0.0 { diff.value / norm.value } else { diff.value },
        iterations: diff.iterations + norm.iterations,
        converged: diff.converged && norm.converged,
    })
}

/// `e_s = ‖I - A F^{-1}‖` with `F^{-1}` given as an operator.
pub fn estimate_inverse_error_op<T: Scalar>(
    op_a: &dyn LinearOperator<T>,
    f_inv: &dyn LinearOperator<T>,
    opts: PowerOptions,
) -> Result<ErrorEstimate> {
    let n = check_dims(op_a, f_inv)?;
    let e = power_norm(
        n,
        |x| sub(x.to_vec(), &op_a.apply(&f_inv.apply(x))),
        |y| sub(y.to_vec(), &f_inv.apply_adjoint(&op_a.apply_adjoint(y))),
        opts.tol,
        opts.maxit,
        opts.seed,
    );
    Ok(ErrorEstimate {
        value: e.value,
        iterations: e.iterations,
        converged: e.converged,
    })
}

pub fn estimate_inverse_error<T: Scalar>(op_a: &dyn LinearOperator<T>, f: &Factorization<T>) -> Result<ErrorEstimate> {
    estimate_inverse_error_op(op_a, &InverseOperator(f), PowerOptions::default())
}

/// Converts a complex result back to `T`, dropping the imaginary part for
/// real fields.
pub(crate) fn from_c64_lossy<T: Scalar>(z: Complex64) -> T {
    if T::IS_COMPLEX {
        T::from_c64(z).expect("complex field")
    } else {
        T::from_f64(z.re)
    }
}
