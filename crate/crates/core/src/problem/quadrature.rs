//! Adaptive tensor Gauss quadrature for the weakly singular self-interaction
//! integral over one grid element.

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const ORDER: usize = 16;
const MAX_DEPTH: usize = 60;

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new() -> Self {
        let (x, w) = gauss_legendre(ORDER);
        Self { x, w }
    }

    /// Tensor rule on the box `lo + [0, size]^d`.
    fn boxed(&self, f: &dyn Fn(&[f64]) -> Complex64, lo: &[f64], size: f64) -> Complex64 {
        let d = lo.len();
        let n = self.x.len();
        let half = size / 2.0;
        let mut idx = vec![0usize; d];
        let mut p = vec![0.0; d];
        let mut acc = Complex64::new(0.0, 0.0);
        loop {
            let mut w = 1.0;
            for a in 0..d {
                p[a] = lo[a] + half * (self.x[idx[a]] + 1.0);
                w *= self.w[idx[a]] * half;
            }
            acc += f(&p) * w;
            let mut a = 0;
            while a < d {
                idx[a] += 1;
                if idx[a] < n {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == d {
                break;
            }
        }
        acc
    }

    /// Smooth-box integral refined until one split agrees with the coarse
    /// estimate to `tol`.
    fn smooth(&self, f: &dyn Fn(&[f64]) -> Complex64, lo: &[f64], size: f64, coarse: Complex64, tol: f64, depth: usize) -> Complex64 {
        let d = lo.len();
        let half = size / 2.0;
        let subs: Vec<Vec<f64>> = (0..1usize << d)
            .map(|mask| (0..d).map(|a| lo[a] + if mask >> a & 1 == 1 { half } else { 0.0 }).collect())
            .collect();
        let parts: Vec<Complex64> = subs.iter().map(|s| self.boxed(f, s, half)).collect();
        let fine: Complex64 = parts.iter().sum();
        if (fine - coarse).norm() <= tol || depth >= MAX_DEPTH {
            return fine;
        }
        let sub_tol = tol / (1usize << d) as f64;
        subs.iter()
            .zip(parts)
            .map(|(s, c)| self.smooth(f, s, half, c, sub_tol, depth + 1))
            .sum()
    }
}

/// `int_{[0,a]^d} f`, where `f` may be singular at the origin only.
///
/// The box is split into `2^d` halves; the corner half is recursed on until
/// its Gauss estimate falls below a fraction of `tol`, every other half is
/// integrated adaptively as a smooth box.
pub fn corner_singular_integral(f: &dyn Fn(&[f64]) -> Complex64, d: usize, a: f64, tol: f64) -> Complex64 {
    let rule = Rule::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut size = a;
    let origin = vec![0.0; d];
    for _ in 0..MAX_DEPTH {
        let corner = rule.boxed(f, &origin, size);
        if corner.norm() <= 0.01 * tol {
            total += corner;
            return total;
        }
        let half = size / 2.0;
        for mask in 1..(1usize << d) {
            let lo: Vec<f64> = (0..d).map(|k| if mask >> k & 1 == 1 { half } else { 0.0 }).collect();
            let coarse = rule.boxed(f, &lo, half);
            total += rule.smooth(f, &lo, half, coarse, tol / 8.0, 0);
        }
        size = half;
    }
    total
}

/// `int_{[-1/2,1/2]^d} g(|t|) dt` for a radial integrand singular at 0.
pub fn cell_radial_integral(g: &dyn Fn(f64) -> Complex64, d: usize, tol: f64) -> Complex64 {
    let f = |p: &[f64]| g(p.iter().map(|v| v * v).sum::<f64>().sqrt());
    let orthant = corner_singular_integral(&f, d, 0.5, tol / (1 << d) as f64);
    orthant * (1 << d) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        for deg in 0..32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!(x[2].abs() < 1e-16);
    }

    // Over a square centered at the singularity, split into four triangles
    // with apex at the origin; in polar form each reduces to a smooth edge
    // integral: int log r dA = (a/2) int_edge (log R - 1/2) dl, a = 1/2.
    fn log_square_oracle() -> f64 {
        let (x, w) = gauss_legendre(40);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let t = 0.5 * xi;
            let r = (t * t + 0.25f64).sqrt();
            s += 0.5 * wi * (r.ln() - 0.5);
        }
        4.0 * 0.25 * s
    }

    #[test]
    fn log_cell_integral() {
        let q = cell_radial_integral(&|r| Complex64::new(r.ln(), 0.0), 2, 1e-13);
        let closed = (2f64.ln() - 3.0 + std::f64::consts::FRAC_PI_2) / 2.0 - 2f64.ln();
        assert!((q.re - closed).abs() < 1e-12, "{} vs {}", q.re, closed);
        assert!((q.re - log_square_oracle()).abs() < 1e-12);
    }

    // int_cube 1/r dV = 6 * (a/2) int_face dA / R with a = 1/2.
    #[test]
    fn inverse_distance_cube_integral() {
        let (x, w) = gauss_legendre(40);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, wj) in x.iter().zip(&w) {
                let (u, v) = (0.5 * xi, 0.5 * yj);
                s += 0.25 * wi * wj / (u * u + v * v + 0.25).sqrt();
            }
        }
        let oracle = 6.0 * 0.25 * s;
        let q = cell_radial_integral(&|r| Complex64::new(1.0 / r, 0.0), 3, 1e-12);
        assert!((q.re - oracle).abs() < 1e-11, "{} vs {}", q.re, oracle);
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let g = |r: f64| Complex64::new(r.ln(), 0.0);
        let a = cell_radial_integral(&g, 2, 1e-12);
        let b = cell_radial_integral(&g, 2, 5e-13);
        assert!((a - b).norm() < 1e-12);
    }
}
