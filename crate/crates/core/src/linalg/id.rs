//! Column interpolative decomposition from a thin pivoted QR.
//!
//! Given `M` and a relative precision `tol`, the redundant columns are
//! expressed through the skeleton columns as `M[:, rd] ≈ M[:, sk] T`,
//! with the rank chosen as the number of pivots satisfying
//! `|R_kk| > tol * |R_11|`.

use crate::linalg::dense::Mat;
use crate::linalg::norm::two_norm_estimate;
use crate::scalar::{norm2, Scalar};

/// Skeleton / redundant split of the columns of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct IdResult<T> {
    /// Skeleton columns in pivot order.
    pub sk: Vec<usize>,
    /// Redundant columns in pivot order.
    pub rd: Vec<usize>,
    /// Interpolation matrix of shape `|sk| x |rd|`.
    pub t: Mat<T>,
}

impl<T: Scalar> IdResult<T> {
    pub fn rank(&self) -> usize {
        self.sk.len()
    }

    /// All columns redundant; used when there is nothing to preserve.
    pub fn all_redundant(n: usize) -> Self {
        Self {
            sk: Vec::new(),
            rd: (0..n).collect(),
            t: Mat::zeros(0, n),
        }
    }

    /// `‖T‖ / sqrt(k (n - k))`, the effective constant `f` in the ID bound.
    pub fn growth_factor(&self) -> f64 {
        let k = self.sk.len() as f64;
        let r = self.rd.len() as f64;
        if k == 0.0 || r == 0.0 {
            return 0.0;
        }
        two_norm_estimate(&self.t) / (k * r).sqrt()
    }

    /// `M[:, rd] - M[:, sk] T`.
    pub fn residual(&self, m: &Mat<T>) -> Mat<T> {
        let approx = m.select_cols(&self.sk).matmul(&self.t);
        let mut res = m.select_cols(&self.rd);
        res.sub_assign(&approx);
        res
    }
}

/// Computes an adaptive-rank column ID of `m` at relative precision `tol`.
///
/// Pivot ties go to the lowest original column index so that identical
/// inputs always produce identical splits.
pub fn interpolative_decompose<T: Scalar>(m: &Mat<T>, tol: f64) -> IdResult<T> {
    assert!(tol > 0.0, "ID tolerance must be positive");
    let rows = m.rows();
    let n = m.cols();
    if n == 0 {
        return IdResult {
            sk: Vec::new(),
            rd: Vec::new(),
            t: Mat::zeros(0, 0),
        };
    }
    if rows == 0 {
        return IdResult::all_redundant(n);
    }

    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| norm2(a.col(j))).collect();
    let mut ref_norms = norms.clone();
    let kmax = rows.min(n);
    let mut r11 = 0.0;
    let mut k = 0;
    let mut u = vec![T::zero(); rows];

    while k < kmax {
        let mut p = k;
        for j in k + 1..n {
            if norms[j] > norms[p] || (norms[j] == norms[p] && perm[j] < perm[p]) {
                p = j;
            }
        }
        let pivot = norms[p];
        if k == 0 {
            if pivot == 0.0 {
                break;
            }
            r11 = pivot;
        } else if pivot <= tol * r11 {
            break;
        }
        a.swap_cols(k, p);
        perm.swap(k, p);
        norms.swap(k, p);
        ref_norms.swap(k, p);

        // Householder reflector mapping a[k.., k] onto beta e_1.
        let colk = &a.col(k)[k..];
        let xnorm = norm2(colk);
        if xnorm == 0.0 {
            break;
        }
        let alpha = colk[0];
        let phase = if alpha.abs() == 0.0 {
            T::one()
        } else {
            alpha.scale(1.0 / alpha.abs())
        };
        let beta = -(phase.scale(xnorm));
        let len = rows - k;
        u[..len].copy_from_slice(colk);
        u[0] = alpha - beta;
        let unorm2: f64 = u[..len].iter().map(|v| v.abs2()).sum();
        {
            let ck = a.col_mut(k);
            ck[k] = beta;
            for v in &mut ck[k + 1..] {
                *v = T::zero();
            }
        }
        if unorm2 > 0.0 {
            let scale = 2.0 / unorm2;
            for j in k + 1..n {
                let cj = &mut a.col_mut(j)[k..];
                let mut s = T::zero();
                for (ui, &ci) in u[..len].iter().zip(cj.iter()) {
                    s += ui.conj() * ci;
                }
                let s = s.scale(scale);
                for (ci, &ui) in cj.iter_mut().zip(&u[..len]) {
                    *ci -= ui * s;
                }
            }
        }

        // Downdate partial column norms, recomputing when cancellation bites.
        for j in k + 1..n {
            if norms[j] == 0.0 {
                continue;
            }
            let rkj = a[(k, j)].abs();
            let ratio = rkj / norms[j];
            let t = (1.0 - ratio * ratio).max(0.0);
            let t2 = t * (norms[j] / ref_norms[j]).powi(2);
            if t2 <= f64::EPSILON.sqrt() {
                let v = norm2(&a.col(j)[k + 1..]);
                norms[j] = v;
                ref_norms[j] = v;
            } else {
                norms[j] *= t.sqrt();
            }
        }
        k += 1;
    }

    // T = R1^{-1} R2 by back substitution.
    let nr = n - k;
    let mut t = Mat::zeros(k, nr);
    for c in 0..nr {
        let src = a.col(k + c);
        let dst = t.col_mut(c);
        dst.copy_from_slice(&src[..k]);
        for i in (0..k).rev() {
            let mut v = dst[i];
            for l in i + 1..k {
                v -= a[(i, l)] * dst[l];
            }
            dst[i] = v / a[(i, i)];
        }
    }

    let result = IdResult {
        sk: perm[..k].to_vec(),
        rd: perm[k..].to_vec(),
        t,
    };
    if k > 0 && nr > 0 {
        let f = result.growth_factor();
        if f > 2.2 {
            log::warn!("ID interpolation growth f = {f:.2} exceeds 2 (rank {k}, {n} columns)");
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn duplicate_scaled_column() {
        // M = [c, 2c]: column pivoting keeps the larger column 2c and
        // interpolates c from it with T = [1/2].
        let m = Mat::from_rows(&[&[1.0, 2.0], &[-3.0, -6.0], &[0.5, 1.0]]);
        let id = interpolative_decompose(&m, 1e-12);
        assert_eq!(id.sk, vec![1]);
        assert_eq!(id.rd, vec![0]);
        assert!((id.t[(0, 0)] - 0.5).abs() < 1e-15);
        // Column order does not change which column is kept.
        let id = interpolative_decompose(&m.select_cols(&[1, 0]), 1e-12);
        assert_eq!((id.sk, id.rd), (vec![0], vec![1]));
        assert!((id.t[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_columns_full_rank() {
        let m = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0], &[0.0, 0.0, 0.0]]);
        let id = interpolative_decompose(&m, 1e-12);
        assert!(id.rd.is_empty());
        assert_eq!(id.t.cols(), 0);
        // largest norm first
        assert_eq!(id.sk, vec![2, 1, 0]);
    }

    #[test]
    fn zero_matrix_is_rank_zero() {
        let m = Mat::<f64>::zeros(5, 3);
        let id = interpolative_decompose(&m, 1e-12);
        assert!(id.sk.is_empty());
        assert_eq!(id.rd, vec![0, 1, 2]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let m = Mat::from_rows(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let id = interpolative_decompose(&m, 1e-12);
        assert_eq!(id.sk, vec![0, 1]);
        assert_eq!(id.rd, vec![2]);
    }

    #[test]
    fn complex_rank_one() {
        let c = [C::new(1.0, 2.0), C::new(-0.5, 0.25), C::new(0.0, 3.0)];
        let s = C::new(0.3, -1.7);
        let m = Mat::from_fn(3, 2, |i, j| if j == 0 { c[i] } else { c[i] * s });
        let id = interpolative_decompose(&m, 1e-12);
        assert_eq!(id.rank(), 1);
        assert!(id.residual(&m).norm_fro() < 1e-14 * m.norm_fro());
    }
}
