//! Pivoted LU and symmetric LDL^T factorizations of small dense blocks.
//!
//! Both forms store their factors packed in one square matrix: the strictly
//! lower part holds the unit-lower factor and the upper part (LU) or the
//! diagonal (LDL) holds the rest.

use crate::error::{Error, Result};
use crate::linalg::dense::{Mat, Op};
use crate::scalar::Scalar;

/// Pivots smaller than this multiple of the largest entry are singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

// A symmetric pivot this much smaller than the largest remaining entry in
// its column is considered unstable and triggers the LU fallback.
const LDL_PIVOT_RATIO: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// `P B = L U` with row permutation `P`.
    Lu,
    /// `P B P^T = L D L^T` (plain transpose, valid for complex symmetric `B`).
    Ldl,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockFactor<T> {
    pub kind: FactorKind,
    /// `perm[i]` is the original row (and for LDL, column) placed at `i`.
    pub perm: Vec<usize>,
    pub packed: Mat<T>,
}

/// Factors a square block, preferring LDL^T when `symmetric` is set.
pub fn factor_block<T: Scalar>(b: &Mat<T>, symmetric: bool) -> Result<BlockFactor<T>> {
    assert_eq!(b.rows(), b.cols(), "factor_block needs a square block");
    if symmetric {
        if let Some(f) = ldl(b)? {
            return Ok(f);
        }
    }
    lu(b)
}

fn threshold<T: Scalar>(b: &Mat<T>) -> f64 {
    SINGULAR_PIVOT_RTOL * b.max_abs()
}

fn lu<T: Scalar>(b: &Mat<T>) -> Result<BlockFactor<T>> {
    let n = b.rows();
    let thr = threshold(b);
    let mut a = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut pmax = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > pmax {
                pmax = v;
                p = i;
            }
        }
        if pmax <= thr || pmax == 0.0 {
            return Err(Error::SingularBlock {
                step: k,
                pivot: pmax,
                threshold: thr,
            });
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
        }
        let inv = T::one() / a[(k, k)];
        for i in k + 1..n {
            a[(i, k)] *= inv;
        }
        for j in k + 1..n {
            let akj = a[(k, j)];
            if akj == T::zero() {
                continue;
            }
            for i in k + 1..n {
                let lik = a[(i, k)];
                a[(i, j)] -= lik * akj;
            }
        }
    }
    Ok(BlockFactor {
        kind: FactorKind::Lu,
        perm,
        packed: a,
    })
}

/// Returns `Ok(None)` when diagonal pivoting is unstable for this block.
fn ldl<T: Scalar>(b: &Mat<T>) -> Result<Option<BlockFactor<T>>> {
    let n = b.rows();
    let thr = threshold(b);
    let mut a = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut pmax = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, i)].abs();
            if v > pmax {
                pmax = v;
                p = i;
            }
        }
        if p != k {
            perm.swap(k, p);
            sym_swap(&mut a, k, p);
        }
        let mut offmax: f64 = 0.0;
        for i in k + 1..n {
            offmax = offmax.max(a[(i, k)].abs());
        }
        if pmax <= thr || pmax == 0.0 || pmax < LDL_PIVOT_RATIO * offmax {
            return Ok(None);
        }
        let d = a[(k, k)];
        let inv = T::one() / d;
        // Full symmetric trailing update so later swaps see fresh entries.
        for j in k + 1..n {
            let ajk = a[(j, k)];
            if ajk == T::zero() {
                continue;
            }
            let f = ajk * inv;
            for i in k + 1..n {
                let aik = a[(i, k)];
                a[(i, j)] -= aik * f;
            }
        }
        for i in k + 1..n {
            a[(i, k)] *= inv;
        }
        // Keep the upper triangle zero; only lower + diagonal are meaningful.
        for j in k + 1..n {
            a[(k, j)] = T::zero();
        }
    }
    Ok(Some(BlockFactor {
        kind: FactorKind::Ldl,
        perm,
        packed: a,
    }))
}

/// Symmetric row and column swap.
fn sym_swap<T: Scalar>(a: &mut Mat<T>, k: usize, p: usize) {
    let n = a.rows();
    for j in 0..n {
        let t = a[(k, j)];
        a[(k, j)] = a[(p, j)];
        a[(p, j)] = t;
    }
    a.swap_cols(k, p);
}

impl<T: Scalar> BlockFactor<T> {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of scalars needed to store the factor.
    pub fn stored_len(&self) -> usize {
        let n = self.dim();
        match self.kind {
            FactorKind::Lu => n * n,
            FactorKind::Ldl => n * (n + 1) / 2,
        }
    }

    fn permute(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    fn unpermute(&self, y: &[T], out: &mut [T]) {
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = y[i];
        }
    }

    /// `y <- L y` (unit lower).
    pub fn apply_lower(&self, y: &mut [T]) {
        let a = &self.packed;
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in 0..i {
                s += a[(i, k)] * y[k];
            }
            y[i] = s;
        }
    }

    /// `y <- L^{-1} y`.
    pub fn solve_lower(&self, y: &mut [T]) {
        let a = &self.packed;
        let n = self.dim();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= a[(i, k)] * y[k];
            }
            y[i] = s;
        }
    }

    /// `y <- op(L) y` for `op` in {T, C}.
    fn apply_lower_t(&self, y: &mut [T], conj: bool) {
        let a = &self.packed;
        let n = self.dim();
        for k in 0..n {
            let mut s = y[k];
            for i in k + 1..n {
                let l = if conj { a[(i, k)].conj() } else { a[(i, k)] };
                s += l * y[i];
            }
            y[k] = s;
        }
    }

    /// `y <- op(L)^{-1} y` for `op` in {T, C}.
    fn solve_lower_t(&self, y: &mut [T], conj: bool) {
        let a = &self.packed;
        let n = self.dim();
        for k in (0..n).rev() {
            let mut s = y[k];
            for i in k + 1..n {
                let l = if conj { a[(i, k)].conj() } else { a[(i, k)] };
                s -= l * y[i];
            }
            y[k] = s;
        }
    }

    /// `y <- U y` (LU) or `y <- D L^T y` (LDL).
    pub fn apply_upper(&self, y: &mut [T]) {
        let a = &self.packed;
        let n = self.dim();
        match self.kind {
            FactorKind::Lu => {
                for i in 0..n {
                    let mut s = T::zero();
                    for k in i..n {
                        s += a[(i, k)] * y[k];
                    }
                    y[i] = s;
                }
            }
            FactorKind::Ldl => {
                self.apply_lower_t(y, false);
                for i in 0..n {
                    y[i] *= a[(i, i)];
                }
            }
        }
    }

    /// `y <- U^{-1} y` (LU) or `y <- (D L^T)^{-1} y` (LDL).
    pub fn solve_upper(&self, y: &mut [T]) {
        let a = &self.packed;
        let n = self.dim();
        match self.kind {
            FactorKind::Lu => {
                for i in (0..n).rev() {
                    let mut s = y[i];
                    for k in i + 1..n {
                        s -= a[(i, k)] * y[k];
                    }
                    y[i] = s / a[(i, i)];
                }
            }
            FactorKind::Ldl => {
                for i in 0..n {
                    y[i] /= a[(i, i)];
                }
                self.solve_lower_t(y, false);
            }
        }
    }

    /// `y <- U^* y` (LU) or `y <- conj(L) conj(D) y` (LDL).
    fn apply_upper_adj(&self, y: &mut [T]) {
        let a = &self.packed;
        let n = self.dim();
        match self.kind {
            FactorKind::Lu => {
                for i in (0..n).rev() {
                    let mut s = T::zero();
                    for k in 0..=i {
                        s += a[(k, i)].conj() * y[k];
                    }
                    y[i] = s;
                }
            }
            FactorKind::Ldl => {
                for i in 0..n {
                    y[i] *= a[(i, i)].conj();
                }
                for i in (0..n).rev() {
                    let mut s = y[i];
                    for k in 0..i {
                        s += a[(i, k)].conj() * y[k];
                    }
                    y[i] = s;
                }
            }
        }
    }

    fn solve_upper_adj(&self, y: &mut [T]) {
        let a = &self.packed;
        let n = self.dim();
        match self.kind {
            FactorKind::Lu => {
                for i in 0..n {
                    let mut s = y[i];
                    for k in 0..i {
                        s -= a[(k, i)].conj() * y[k];
                    }
                    y[i] = s / a[(i, i)].conj();
                }
            }
            FactorKind::Ldl => {
                for i in 0..n {
                    let mut s = y[i];
                    for k in 0..i {
                        s -= a[(i, k)].conj() * y[k];
                    }
                    y[i] = s;
                }
                for i in 0..n {
                    y[i] /= a[(i, i)].conj();
                }
            }
        }
    }

    /// `x <- B^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.dim());
        let mut y = self.permute(x);
        self.solve_lower(&mut y);
        self.solve_upper(&mut y);
        match self.kind {
            FactorKind::Lu => x.copy_from_slice(&y),
            FactorKind::Ldl => self.unpermute(&y, x),
        }
    }

    /// `x <- B^{-*} x`.
    pub fn solve_adjoint_in_place(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.dim());
        match self.kind {
            FactorKind::Lu => {
                // B^* = U^* L^* P
                let mut y = x.to_vec();
                self.solve_upper_adj(&mut y);
                self.solve_lower_t(&mut y, true);
                self.unpermute(&y, x);
            }
            FactorKind::Ldl => {
                // B^* = P^T conj(L) conj(D) L^* P
                let mut y = self.permute(x);
                self.solve_upper_adj(&mut y);
                self.solve_lower_t(&mut y, true);
                self.unpermute(&y, x);
            }
        }
    }

    /// `x <- B x`.
    pub fn apply_in_place(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.dim());
        match self.kind {
            FactorKind::Lu => {
                let mut y = x.to_vec();
                self.apply_upper(&mut y);
                self.apply_lower(&mut y);
                self.unpermute(&y, x);
            }
            FactorKind::Ldl => {
                let mut y = self.permute(x);
                self.apply_upper(&mut y);
                self.apply_lower(&mut y);
                self.unpermute(&y, x);
            }
        }
    }

    /// `x <- B^* x`.
    pub fn apply_adjoint_in_place(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.dim());
        let mut y = self.permute(x);
        self.apply_lower_t(&mut y, true);
        self.apply_upper_adj(&mut y);
        match self.kind {
            FactorKind::Lu => x.copy_from_slice(&y),
            FactorKind::Ldl => self.unpermute(&y, x),
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_adjoint(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_adjoint_in_place(&mut x);
        x
    }

    pub fn apply_op_in_place(&self, op: Op, x: &mut [T]) {
        match op {
            Op::N => self.apply_in_place(x),
            Op::C => self.apply_adjoint_in_place(x),
            Op::T => {
                conj_in_place(x);
                self.apply_adjoint_in_place(x);
                conj_in_place(x);
            }
        }
    }

    pub fn solve_op_in_place(&self, op: Op, x: &mut [T]) {
        match op {
            Op::N => self.solve_in_place(x),
            Op::C => self.solve_adjoint_in_place(x),
            Op::T => {
                conj_in_place(x);
                self.solve_adjoint_in_place(x);
                conj_in_place(x);
            }
        }
    }

    /// `B^{-1} M` column by column.
    pub fn solve_mat(&self, m: &Mat<T>) -> Mat<T> {
        let mut out = m.clone();
        for j in 0..out.cols() {
            self.solve_in_place(out.col_mut(j));
        }
        out
    }

    /// Reassembles `B` from its factors.
    pub fn reconstruct(&self) -> Mat<T> {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            self.apply_in_place(&mut e);
            out.col_mut(j).copy_from_slice(&e);
        }
        out
    }

    /// Scalars in storage order: LU column-major square, LDL packed lower
    /// triangle by columns (diagonal included).
    pub fn stored_values(&self) -> Vec<T> {
        let n = self.dim();
        match self.kind {
            FactorKind::Lu => self.packed.as_slice().to_vec(),
            FactorKind::Ldl => {
                let mut v = Vec::with_capacity(self.stored_len());
                for j in 0..n {
                    v.extend_from_slice(&self.packed.col(j)[j..]);
                }
                v
            }
        }
    }

    /// Inverse of [`stored_values`](Self::stored_values).
    pub fn from_stored(kind: FactorKind, perm: Vec<usize>, values: &[T]) -> Option<Self> {
        let n = perm.len();
        let packed = match kind {
            FactorKind::Lu => {
                if values.len() != n * n {
                    return None;
                }
                Mat::from_col_major(n, n, values.to_vec())
            }
            FactorKind::Ldl => {
                if values.len() != n * (n + 1) / 2 {
                    return None;
                }
                let mut m = Mat::zeros(n, n);
                let mut off = 0;
                for j in 0..n {
                    let len = n - j;
                    m.col_mut(j)[j..].copy_from_slice(&values[off..off + len]);
                    off += len;
                }
                m
            }
        };
        Some(Self { kind, perm, packed })
    }
}

fn conj_in_place<T: Scalar>(x: &mut [T]) {
    if T::IS_COMPLEX {
        x.iter_mut().for_each(|v| *v = v.conj());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_solve() {
        for sym in [false, true] {
            let f = factor_block(&Mat::<f64>::identity(3), sym).unwrap();
            assert_eq!(f.solve(&[1.0, -2.0, 3.5]), vec![1.0, -2.0, 3.5]);
        }
    }

    #[test]
    fn two_by_two_symmetric() {
        let b = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let f = factor_block(&b, true).unwrap();
        assert_eq!(f.kind, FactorKind::Ldl);
        assert!(close(&f.solve(&[3.0, 3.0]), &[1.0, 1.0], 1e-15));
        let f = factor_block(&b, false).unwrap();
        assert!(close(&f.solve(&[3.0, 3.0]), &[1.0, 1.0], 1e-15));
    }

    #[test]
    fn rank_deficient_is_singular() {
        let b = Mat::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        for sym in [false, true] {
            assert!(matches!(factor_block(&b, sym), Err(Error::SingularBlock { .. })));
        }
    }

    #[test]
    fn zero_diagonal_symmetric_falls_back_to_lu() {
        let b = Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = factor_block(&b, true).unwrap();
        assert_eq!(f.kind, FactorKind::Lu);
        assert!(close(&f.solve(&[2.0, 3.0]), &[3.0, 2.0], 1e-15));
    }

    fn check_all_ops(b: &Mat<C>, sym: bool) {
        let n = b.rows();
        let f = factor_block(b, sym).unwrap();
        let x: Vec<C> = (0..n).map(|i| C::new(1.0 + i as f64, 0.5 - i as f64)).collect();
        let tol = 1e-12 * b.norm_fro();
        let diff = |u: &[C], v: &[C]| u.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(f.reconstruct().sub(b).norm_fro() <= 1e-13 * b.norm_fro());
        let mut y = x.clone();
        f.apply_in_place(&mut y);
        assert!(diff(&y, &b.matvec(Op::N, &x)) <= tol);
        let mut y = x.clone();
        f.apply_adjoint_in_place(&mut y);
        assert!(diff(&y, &b.matvec(Op::C, &x)) <= tol);
        let mut y = x.clone();
        f.apply_op_in_place(Op::T, &mut y);
        assert!(diff(&y, &b.matvec(Op::T, &x)) <= tol);
        let y = f.solve(&x);
        assert!(diff(&b.matvec(Op::N, &y), &x) <= 1e-10);
        let y = f.solve_adjoint(&x);
        assert!(diff(&b.matvec(Op::C, &y), &x) <= 1e-10);
        let mut y = x.clone();
        f.solve_op_in_place(Op::T, &mut y);
        assert!(diff(&b.matvec(Op::T, &y), &x) <= 1e-10);
        let g = BlockFactor::from_stored(f.kind, f.perm.clone(), &f.stored_values()).unwrap();
        assert_eq!(g.reconstruct(), f.reconstruct());
    }

    #[test]
    fn general_complex_block() {
        let b = Mat::from_fn(5, 5, |i, j| {
            C::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3) + if i == j { C::new(0.5, 0.0) } else { C::new(0.0, 0.0) }
        });
        check_all_ops(&b, false);
    }

    #[test]
    fn complex_symmetric_block() {
        let b = Mat::from_fn(6, 6, |i, j| {
            let (p, q) = (i.min(j) as f64, i.max(j) as f64);
            C::new(1.0 / (1.0 + p + q), 0.2 * (p - q)) + if i == j { C::new(3.0 + p, 1.0) } else { C::new(0.0, 0.0) }
        });
        let f = factor_block(&b, true).unwrap();
        assert_eq!(f.kind, FactorKind::Ldl);
        check_all_ops(&b, true);
    }

    #[test]
    fn pieces_compose_to_block() {
        let b = Mat::from_rows(&[&[4.0, 1.0, 2.0], &[1.0, 5.0, 0.5], &[2.0, 0.5, 6.0]]);
        for sym in [false, true] {
            let f = factor_block(&b, sym).unwrap();
            let x = [1.0, 2.0, -1.0];
            let mut y = f.permute(&x);
            f.apply_upper(&mut y);
            f.apply_lower(&mut y);
            f.solve_lower(&mut y);
            f.solve_upper(&mut y);
            assert!(close(&y, &f.permute(&x), 1e-14));
        }
    }
}
