//! `A x` by circulant embedding of the kernel on a uniform grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{from_c64_lossy, LinearOperator};
use crate::error::{Error, Result};
use crate::problem::KernelProblem;
use crate::scalar::Scalar;

pub struct FftOperator<T> {
    d: usize,
    n: usize,
    /// Embedded length per axis, `2n`.
    m: usize,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    /// Transform of the embedded kernel.
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub fn fft_matvec_operator<T: Scalar>(problem: &KernelProblem<T>) -> Result<FftOperator<T>> {
    if !problem.translation_invariant || !problem.has_kernel() {
        return Err(Error::NotTranslationInvariant);
    }
    let d = problem.spec.d;
    let n = problem.spec.n;
    let m = 2 * n;
    let h = problem.spec.h();
    let w = problem.weight();
    let total = m.pow(d as u32);
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(m);
    let inverse = planner.plan_fft_inverse(m);

    let mut g = vec![Complex64::new(0.0, 0.0); total];
    for (idx, gv) in g.iter_mut().enumerate() {
        let mut r2 = 0.0;
        let mut rest = idx;
        let mut skip = false;
        for _ in 0..d {
            let k = rest % m;
            rest /= m;
            let lag = if k < n {
                k as f64
            } else if k > n {
                k as f64 - m as f64
            } else {
                skip = true;
                0.0
            };
            r2 += (lag * h) * (lag * h);
        }
        if skip {
            continue;
        }
        *gv = if r2 == 0.0 {
            problem.self_integral().to_c64()
        } else {
            problem.kind.eval_c64(r2.sqrt()) * w
        };
    }
    let mut op = FftOperator {
        d,
        n,
        m,
        a: problem.a.clone(),
        b: problem.b.clone(),
        c: problem.c.clone(),
        kernel_hat: Vec::new(),
        forward,
        inverse,
    };
    op.transform(&mut g, false);
    op.kernel_hat = g;
    Ok(op)
}

impl<T: Scalar> FftOperator<T> {
    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let m = self.m;
        let total = data.len();
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.d {
            let stride = m.pow(axis as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = stride * m;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[start + k * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[start + k * stride] = *v;
                    }
                }
            }
        }
    }

    /// Embedded position of grid index `i`.
    fn embed(&self, i: usize) -> usize {
        let (n, m) = (self.n, self.m);
        let mut rest = i;
        let mut pos = 0;
        let mut stride = 1;
        for _ in 0..self.d {
            pos += (rest % n) * stride;
            rest /= n;
            stride *= m;
        }
        pos
    }

    /// `K v` for the bare kernel matrix, conjugating `K` when `conj` is set.
    fn convolve(&self, v: &[Complex64], conj: bool) -> Vec<Complex64> {
        let total = self.kernel_hat.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        for (i, &vi) in v.iter().enumerate() {
            buf[self.embed(i)] = if conj { vi.conj() } else { vi };
        }
        self.transform(&mut buf, false);
        buf.iter_mut().zip(&self.kernel_hat).for_each(|(x, k)| *x *= k);
        self.transform(&mut buf, true);
        let scale = 1.0 / total as f64;
        (0..v.len())
            .map(|i| {
                let z = buf[self.embed(i)] * scale;
                if conj {
                    z.conj()
                } else {
                    z
                }
            })
            .collect()
    }
}

impl<T: Scalar> LinearOperator<T> for FftOperator<T> {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim());
        let u: Vec<Complex64> = x.iter().zip(&self.c).map(|(&xi, &ci)| (ci * xi).to_c64()).collect();
        let ku = self.convolve(&u, false);
        x.iter()
            .zip(&ku)
            .enumerate()
            .map(|(i, (&xi, &k))| self.a[i] * xi + self.b[i] * from_c64_lossy::<T>(k))
            .collect()
    }

    /// `conj(a) x + conj(c) K^* (conj(b) x)`, with `K^* = conj(K)` as the
    /// kernel matrix is symmetric.
    fn apply_adjoint(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim());
        let u: Vec<Complex64> = x.iter().zip(&self.b).map(|(&xi, &bi)| (bi.conj() * xi).to_c64()).collect();
        let ku = self.convolve(&u, true);
        x.iter()
            .zip(&ku)
            .enumerate()
            .map(|(i, (&xi, &k))| self.a[i].conj() * xi + self.c[i].conj() * from_c64_lossy::<T>(k))
            .collect()
    }

    fn label(&self) -> &str {
        "fft"
    }
}
