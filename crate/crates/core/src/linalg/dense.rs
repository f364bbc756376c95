use std::ops::{Index, IndexMut};

use crate::scalar::{axpy, dotc, dotu, norm2, Scalar};

/// How an operand enters a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    /// `A`
    N,
    /// `A^T` (no conjugation)
    T,
    /// `A^*`
    C,
}

impl Op {
    /// Composes `self` after conjugate-transposing the whole expression:
    /// `(op(A))^*` expressed as an op on `A`, up to elementwise conjugation.
    pub fn adjoint(self) -> (Op, bool) {
        match self {
            Op::N => (Op::C, false),
            Op::C => (Op::N, false),
            // (A^T)^* = conj(A)
            Op::T => (Op::N, true),
        }
    }
}

/// Dense column-major matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, " ")?;
            for j in 0..self.cols.min(8) {
                write!(f, " {:?}", self.data[j * self.rows + i])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; convenient in tests.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_fn(m, n, |i, j| rows[i][j])
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two distinct mutable columns.
    pub fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [T], &mut [T]) {
        assert_ne!(a, b);
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            let (x, y) = (&mut hi[..r], &mut lo[b * r..(b + 1) * r]);
            (x, y)
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            let (x, y) = self.two_cols_mut(a, b);
            x.swap_with_slice(y);
        }
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &j in cols {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Stacks matrices with a common column count on top of each other.
    pub fn vstack(parts: &[&Mat<T>]) -> Self {
        let cols = parts.first().map_or(0, |p| p.cols);
        assert!(parts.iter().all(|p| p.cols == cols), "column mismatch");
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let mut out = Self::zeros(rows, cols);
        for j in 0..cols {
            let dst = out.col_mut(j);
            let mut off = 0;
            for p in parts {
                dst[off..off + p.rows].copy_from_slice(p.col(j));
                off += p.rows;
            }
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale_mut(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &Mat<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &Mat<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        let mut out = self.clone();
        out.sub_assign(other);
        out
    }

    /// Shape of `op(self)`.
    pub fn op_shape(&self, op: Op) -> (usize, usize) {
        match op {
            Op::N => (self.rows, self.cols),
            Op::T | Op::C => (self.cols, self.rows),
        }
    }

    /// `y += alpha * op(self) * x`.
    pub fn gemv(&self, op: Op, alpha: T, x: &[T], y: &mut [T]) {
        let (m, n) = self.op_shape(op);
        assert_eq!(x.len(), n, "gemv: x length");
        assert_eq!(y.len(), m, "gemv: y length");
        match op {
            Op::N => {
                for (j, &xj) in x.iter().enumerate() {
                    if xj != T::zero() {
                        axpy(alpha * xj, self.col(j), y);
                    }
                }
            }
            Op::T => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += alpha * dotu(self.col(i), x);
                }
            }
            Op::C => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += alpha * dotc(self.col(i), x);
                }
            }
        }
    }

    pub fn matvec(&self, op: Op, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.op_shape(op).0];
        self.gemv(op, T::one(), x, &mut y);
        y
    }

    /// `op_a(self) * op_b(b)`.
    pub fn mul(&self, op_a: Op, b: &Mat<T>, op_b: Op) -> Mat<T> {
        let (m, k) = self.op_shape(op_a);
        let (k2, n) = b.op_shape(op_b);
        assert_eq!(k, k2, "mul: inner dimension mismatch");
        let mut c = Mat::zeros(m, n);
        if m == 0 || n == 0 || k == 0 {
            return c;
        }
        match (op_a, op_b) {
            (Op::N, _) => {
                for j in 0..n {
                    let cj = c.col_mut(j);
                    for p in 0..k {
                        let bpj = match op_b {
                            Op::N => b[(p, j)],
                            Op::T => b[(j, p)],
                            Op::C => b[(j, p)].conj(),
                        };
                        if bpj != T::zero() {
                            axpy(bpj, self.col(p), cj);
                        }
                    }
                }
            }
            (_, Op::N) => {
                let dot = if op_a == Op::C { dotc::<T> } else { dotu::<T> };
                for j in 0..n {
                    let bj = b.col(j);
                    for i in 0..m {
                        c[(i, j)] = dot(self.col(i), bj);
                    }
                }
            }
            _ => {
                let bb = match op_b {
                    Op::T => b.transpose(),
                    Op::C => b.adjoint(),
                    Op::N => unreachable!(),
                };
                return self.mul(op_a, &bb, Op::N);
            }
        }
        c
    }

    /// `self * b`.
    pub fn matmul(&self, b: &Mat<T>) -> Mat<T> {
        self.mul(Op::N, b, Op::N)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}
