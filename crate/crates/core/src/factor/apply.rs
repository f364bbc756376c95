//! Applying `F`, `F^{-1}` and their adjoints.
//!
//! The adjoint factorization has the same shape as the original with
//! `T_L <-> T_R`, `B_rs -> B_sr^*`, `B_sr -> B_rs^*` and `B_rr -> B_rr^*`, so
//! every sweep below takes an `adj` flag and picks the swapped pieces.

use crate::error::{Error, Result};
use crate::factor::{Factorization, SkelRecord};
use crate::linalg::{Mat, Op};
use crate::scalar::Scalar;

fn gather<T: Scalar>(x: &[T], ids: &[usize]) -> Vec<T> {
    ids.iter().map(|&i| x[i]).collect()
}

fn scatter_add<T: Scalar>(x: &mut [T], ids: &[usize], v: &[T], sign: f64) {
    for (&i, &vi) in ids.iter().zip(v) {
        x[i] += vi.scale(sign);
    }
}

fn scatter<T: Scalar>(x: &mut [T], ids: &[usize], v: &[T]) {
    for (&i, &vi) in ids.iter().zip(v) {
        x[i] = vi;
    }
}

/// `conj(M) v` via `conj(M conj(v))`.
fn matvec_conj<T: Scalar>(m: &Mat<T>, op: Op, v: &[T]) -> Vec<T> {
    let cv: Vec<T> = v.iter().map(|z| z.conj()).collect();
    m.matvec(op, &cv).into_iter().map(|z| z.conj()).collect()
}

struct View<'a, T> {
    rec: &'a SkelRecord<T>,
    symmetric: bool,
    adj: bool,
}

impl<T: Scalar> View<'_, T> {
    /// `T_R v` (`|rd| -> |sk|`).
    fn t_right(&self, v: &[T]) -> Vec<T> {
        if self.adj && self.symmetric {
            // T_L = conj(T)
            matvec_conj(&self.rec.t, Op::N, v)
        } else {
            self.rec.t.matvec(Op::N, v)
        }
    }

    /// `T_L^* v` (`|sk| -> |rd|`).
    fn t_left_adj(&self, v: &[T]) -> Vec<T> {
        let op = if self.symmetric && !self.adj { Op::T } else { Op::C };
        self.rec.t.matvec(op, v)
    }

    /// `B_rs v` (`|sk| -> |rd|`).
    fn b_rs(&self, v: &[T]) -> Vec<T> {
        if !self.adj {
            return self.rec.b_rs.matvec(Op::N, v);
        }
        match &self.rec.b_sr {
            Some(b_sr) => b_sr.matvec(Op::C, v),
            // B_sr^* = conj(B_rs)
            None => matvec_conj(&self.rec.b_rs, Op::N, v),
        }
    }

    /// `B_sr v` (`|rd| -> |sk|`).
    fn b_sr(&self, v: &[T]) -> Vec<T> {
        if self.adj {
            return self.rec.b_rs.matvec(Op::C, v);
        }
        match &self.rec.b_sr {
            Some(b_sr) => b_sr.matvec(Op::N, v),
            None => self.rec.b_rs.matvec(Op::T, v),
        }
    }

    fn rr_op(&self) -> Op {
        if self.adj {
            Op::C
        } else {
            Op::N
        }
    }

    fn rr_solve(&self, v: &mut [T]) {
        self.rec.rd_factor.solve_op_in_place(self.rr_op(), v);
    }

    fn rr_apply(&self, v: &mut [T]) {
        self.rec.rd_factor.apply_op_in_place(self.rr_op(), v);
    }
}

impl<T: Scalar> Factorization<T> {
    fn check_len(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn views(&self, adj: bool) -> impl DoubleEndedIterator<Item = Vec<View<'_, T>>> + '_ {
        self.levels.iter().map(move |l| {
            l.records
                .iter()
                .map(|rec| View {
                    rec,
                    symmetric: self.symmetric,
                    adj,
                })
                .collect()
        })
    }

    fn apply_impl(&self, x: &[T], adj: bool) -> Result<Vec<T>> {
        self.check_len(x)?;
        let mut x = x.to_vec();
        for level in self.views(adj) {
            for v in &level {
                let (sk, rd) = (&v.rec.sk, &v.rec.rd);
                let ts = v.t_right(&gather(&x, rd));
                scatter_add(&mut x, sk, &ts, 1.0);
                let mut w = v.b_rs(&gather(&x, sk));
                v.rr_solve(&mut w);
                scatter_add(&mut x, rd, &w, 1.0);
            }
        }
        for level in self.views(adj) {
            for v in &level {
                let mut xr = gather(&x, &v.rec.rd);
                v.rr_apply(&mut xr);
                scatter(&mut x, &v.rec.rd, &xr);
            }
        }
        let mut xt = gather(&x, &self.terminal_ids);
        self.terminal.apply_op_in_place(if adj { Op::C } else { Op::N }, &mut xt);
        scatter(&mut x, &self.terminal_ids, &xt);
        for level in self.views(adj).rev() {
            for v in level.iter().rev() {
                let (sk, rd) = (&v.rec.sk, &v.rec.rd);
                let mut xr = gather(&x, rd);
                v.rr_solve(&mut xr);
                let w = v.b_sr(&xr);
                scatter_add(&mut x, sk, &w, 1.0);
                let tl = v.t_left_adj(&gather(&x, sk));
                scatter_add(&mut x, rd, &tl, 1.0);
            }
        }
        Ok(x)
    }

    fn solve_impl(&self, b: &[T], adj: bool) -> Result<Vec<T>> {
        self.check_len(b)?;
        let mut x = b.to_vec();
        for level in self.views(adj) {
            for v in &level {
                let (sk, rd) = (&v.rec.sk, &v.rec.rd);
                let tl = v.t_left_adj(&gather(&x, sk));
                scatter_add(&mut x, rd, &tl, -1.0);
                let mut xr = gather(&x, rd);
                v.rr_solve(&mut xr);
                let w = v.b_sr(&xr);
                scatter_add(&mut x, sk, &w, -1.0);
            }
        }
        for level in self.views(adj) {
            for v in &level {
                let mut xr = gather(&x, &v.rec.rd);
                v.rr_solve(&mut xr);
                scatter(&mut x, &v.rec.rd, &xr);
            }
        }
        let mut xt = gather(&x, &self.terminal_ids);
        self.terminal.solve_op_in_place(if adj { Op::C } else { Op::N }, &mut xt);
        scatter(&mut x, &self.terminal_ids, &xt);
        for level in self.views(adj).rev() {
            for v in level.iter().rev() {
                let (sk, rd) = (&v.rec.sk, &v.rec.rd);
                let mut w = v.b_rs(&gather(&x, sk));
                v.rr_solve(&mut w);
                scatter_add(&mut x, rd, &w, -1.0);
                let ts = v.t_right(&gather(&x, rd));
                scatter_add(&mut x, sk, &ts, -1.0);
            }
        }
        Ok(x)
    }

    /// `F x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.apply_impl(x, false)
    }

    /// `F^{-1} b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.solve_impl(b, false)
    }

    /// `F^* x`.
    pub fn apply_adjoint(&self, x: &[T]) -> Result<Vec<T>> {
        self.apply_impl(x, true)
    }

    /// `F^{-*} b`.
    pub fn solve_adjoint(&self, b: &[T]) -> Result<Vec<T>> {
        self.solve_impl(b, true)
    }
}
