//! Discretized integral operators `a_i δ_ij + b_i K_ij c_j`.

pub mod bessel;
pub mod kernel;
pub mod quadrature;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

pub use kernel::{kernel_eval, KernelKind};

use crate::error::{Error, Result};
use crate::factor::state::SciStore;
use crate::geometry::{build_uniform_grid, GridSpec, PointSet};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Absolute tolerance of the self-interaction quadrature, measured on the
/// unit reference element.
pub const DIAGONAL_QUAD_TOL: f64 = 1e-12;

/// Anything that can produce entries of a square matrix on demand.
pub trait EntryGenerator<T: Scalar>: Sync {
    fn size(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> T;

    fn block(&self, p: &[usize], q: &[usize]) -> Mat<T> {
        Mat::from_fn(p.len(), q.len(), |i, j| self.entry(p[i], q[j]))
    }
}

#[derive(Clone, Debug)]
enum Source<T> {
    Kernel,
    Explicit(Arc<Mat<T>>),
}

/// A kernel matrix on a uniform grid, or an explicit matrix attached to the
/// same grid for testing.
#[derive(Clone, Debug)]
pub struct KernelProblem<T> {
    pub kind: KernelKind,
    pub spec: GridSpec,
    pub points: PointSet,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    /// `A == A^T` entrywise.
    pub symmetric: bool,
    /// Kernel depends only on `x - y` and the grid is uniform.
    pub translation_invariant: bool,
    pub label: String,
    source: Source<T>,
    /// `int_{Ω_i} K(|x_i - y|) dy`, identical for every element.
    self_integral: T,
    weight: f64,
}

/// `h^d int_{[-1/2,1/2]^d} K(h |t|) dt` by adaptive quadrature.
pub fn diagonal_quadrature(kind: KernelKind, h: f64) -> Complex64 {
    let d = kind.dim();
    let g = |r: f64| kind.eval_c64(h * r);
    quadrature::cell_radial_integral(&g, d, DIAGONAL_QUAD_TOL) * h.powi(d as i32)
}

impl<T: Scalar> KernelProblem<T> {
    /// Builds a problem with coefficient fields given as callbacks on points.
    pub fn new(
        kind: KernelKind,
        spec: GridSpec,
        a: impl Fn(&[f64]) -> T,
        b: impl Fn(&[f64]) -> T,
        c: impl Fn(&[f64]) -> T,
    ) -> Result<Self> {
        if kind.dim() != spec.d {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: spec.d,
            });
        }
        if kind.is_complex() && !T::IS_COMPLEX {
            return Err(Error::ScalarFieldMismatch(format!("{} needs complex scalars", kind.name())));
        }
        let points = build_uniform_grid(&spec);
        let n = points.len();
        let eval = |f: &dyn Fn(&[f64]) -> T| (0..n).map(|i| f(points.point(i))).collect::<Vec<T>>();
        let (a, b, c) = (eval(&a), eval(&b), eval(&c));
        let symmetric = b == c;
        let self_integral = T::from_c64(diagonal_quadrature(kind, spec.h())).ok_or_else(|| {
            Error::ScalarFieldMismatch("complex self-interaction in a real field".into())
        })?;
        Ok(Self {
            kind,
            spec,
            weight: points.measure(),
            points,
            a,
            b,
            c,
            symmetric,
            translation_invariant: true,
            label: "custom".into(),
            source: Source::Kernel,
            self_integral,
        })
    }

    /// An explicit matrix on the grid of `spec`. Proxy compression is not
    /// available for such problems.
    pub fn explicit(spec: GridSpec, m: Mat<T>) -> Result<Self> {
        let n = spec.num_points();
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.rows(),
            });
        }
        let symmetric = (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]));
        let points = build_uniform_grid(&spec);
        Ok(Self {
            kind: if spec.d == 2 { KernelKind::Laplace2D } else { KernelKind::Laplace3D },
            spec,
            weight: points.measure(),
            points,
            a: vec![T::zero(); n],
            b: vec![T::one(); n],
            c: vec![T::one(); n],
            symmetric,
            translation_invariant: false,
            label: "explicit".into(),
            source: Source::Explicit(Arc::new(m)),
            self_integral: T::zero(),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Whether proxy-surface compression is valid for this problem.
    pub fn has_kernel(&self) -> bool {
        matches!(self.source, Source::Kernel)
    }

    /// Element measure `h^d`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn self_integral(&self) -> T {
        self.self_integral
    }

    /// `K_ij` including the quadrature weight, without coefficients.
    #[inline]
    pub fn kernel_entry(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.self_integral;
        }
        let r = self.points.dist(i, self.points.point(j));
        self.kind.eval::<T>(r).scale(self.weight)
    }

    /// Kernel value times `h^d` between an arbitrary point and DOF `j`.
    #[inline]
    pub fn kernel_to_point(&self, x: &[f64], j: usize) -> T {
        let r = self.points.dist(j, x);
        self.kind.eval::<T>(r).scale(self.weight)
    }
}

impl<T: Scalar> EntryGenerator<T> for KernelProblem<T> {
    fn size(&self) -> usize {
        self.n()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> T {
        if let Source::Explicit(m) = &self.source {
            return m[(i, j)];
        }
        // b_i c_j is formed first so that symmetric problems are exactly
        // symmetric entrywise.
        let v = self.kernel_entry(i, j) * (self.b[i] * self.c[j]);
        if i == j {
            self.a[i] + v
        } else {
            v
        }
    }
}

/// One entry of the original matrix.
pub fn matrix_entry<T: Scalar>(problem: &KernelProblem<T>, i: usize, j: usize) -> T {
    problem.entry(i, j)
}

/// Block of the current level matrix: kernel entries plus the delta overlay.
pub fn assemble_block<T: Scalar, G: EntryGenerator<T> + ?Sized>(gen: &G, p: &[usize], q: &[usize], sci: &SciStore<T>) -> Mat<T> {
    let mut out = gen.block(p, q);
    sci.overlay_into(p, q, &mut out);
    out
}

fn ones<T: Scalar>(_: &[f64]) -> T {
    T::one()
}

fn zeros<T: Scalar>(_: &[f64]) -> T {
    T::zero()
}

fn grid(d: usize, n: usize, occupancy: Option<usize>) -> Result<GridSpec> {
    match occupancy {
        Some(o) => GridSpec::with_leaf_occupancy(d, n, o),
        None => GridSpec::default_for(d, n),
    }
}

/// First-kind Laplace volume equation on the unit square.
pub fn example1(n: usize, occupancy: Option<usize>) -> Result<KernelProblem<f64>> {
    Ok(KernelProblem::new(KernelKind::Laplace2D, grid(2, n, occupancy)?, zeros, ones, ones)?.with_label("ex1"))
}

/// Second-kind variant of [`example1`] with `a = 1`.
pub fn example2(n: usize, occupancy: Option<usize>) -> Result<KernelProblem<f64>> {
    Ok(KernelProblem::new(KernelKind::Laplace2D, grid(2, n, occupancy)?, ones, ones, ones)?.with_label("ex2"))
}

/// First-kind Laplace volume equation on the unit cube.
pub fn example5(n: usize, occupancy: Option<usize>) -> Result<KernelProblem<f64>> {
    Ok(KernelProblem::new(KernelKind::Laplace3D, grid(3, n, occupancy)?, zeros, ones, ones)?.with_label("ex5"))
}

/// Second-kind variant of [`example5`].
pub fn example6(n: usize, occupancy: Option<usize>) -> Result<KernelProblem<f64>> {
    Ok(KernelProblem::new(KernelKind::Laplace3D, grid(3, n, occupancy)?, ones, ones, ones)?.with_label("ex6"))
}

/// Gaussian bump `exp(-32 |x - x0|^2)`.
pub fn gaussian_bump(x: &[f64], x0: &[f64]) -> f64 {
    let r2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
    (-32.0 * r2).exp()
}

/// Symmetrized Lippmann–Schwinger equation with `κ` wavelengths across the
/// domain: `a = 1`, `b = c = k sqrt(ω)`, `k = 2 π κ`.
pub fn lippmann_schwinger_problem(kappa: f64, n: usize, x0: [f64; 2], occupancy: Option<usize>) -> Result<KernelProblem<Complex64>> {
    if kappa <= 0.0 {
        return Err(Error::InvalidSpec(format!("kappa must be positive, got {kappa}")));
    }
    let k = 2.0 * PI * kappa;
    let coef = move |x: &[f64]| Complex64::new(k * gaussian_bump(x, &x0).sqrt(), 0.0);
    Ok(KernelProblem::new(KernelKind::Helmholtz2D { k }, grid(2, n, occupancy)?, ones, coef, coef)?.with_label("ex3"))
}

/// DOFs per wavelength for a Helmholtz problem.
pub fn points_per_wavelength(kappa: f64, n: usize) -> f64 {
    n as f64 / kappa
}
