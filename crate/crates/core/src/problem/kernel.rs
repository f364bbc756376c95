use std::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::j0_y0;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// `-log(r) / (2 pi)`
    Laplace2D,
    /// `1 / (4 pi r)`
    Laplace3D,
    /// `(i/4) H0(k r)`
    Helmholtz2D { k: f64 },
}

impl KernelKind {
    pub fn dim(&self) -> usize {
        match self {
            KernelKind::Laplace3D => 3,
            _ => 2,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, KernelKind::Helmholtz2D { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Laplace2D => "laplace2d",
            KernelKind::Laplace3D => "laplace3d",
            KernelKind::Helmholtz2D { .. } => "helmholtz2d",
        }
    }

    /// Kernel value at distance `r > 0` (not checked).
    #[inline]
    pub fn eval_c64(&self, r: f64) -> Complex64 {
        match *self {
            KernelKind::Laplace2D => Complex64::new(-r.ln() / (2.0 * PI), 0.0),
            KernelKind::Laplace3D => Complex64::new(1.0 / (4.0 * PI * r), 0.0),
            KernelKind::Helmholtz2D { k } => {
                let (j, y) = j0_y0(k * r);
                Complex64::new(-y / 4.0, j / 4.0)
            }
        }
    }

    /// Kernel value in the scalar field `T`. Real fields only see the real
    /// kernels; callers guarantee the field matches.
    #[inline]
    pub fn eval<T: Scalar>(&self, r: f64) -> T {
        match *self {
            KernelKind::Laplace2D => T::from_f64(-r.ln() / (2.0 * PI)),
            KernelKind::Laplace3D => T::from_f64(1.0 / (4.0 * PI * r)),
            KernelKind::Helmholtz2D { .. } => {
                T::from_c64(self.eval_c64(r)).expect("complex kernel in a real scalar field")
            }
        }
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(kind: KernelKind, r: f64) -> Result<Complex64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::NonpositiveDistance(r));
    }
    Ok(kind.eval_c64(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_values() {
        assert_eq!(kernel_eval(KernelKind::Laplace2D, 1.0).unwrap().re, 0.0);
        let v = kernel_eval(KernelKind::Laplace3D, 1.0).unwrap().re;
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-17);
        assert!(matches!(kernel_eval(KernelKind::Laplace2D, 0.0), Err(Error::NonpositiveDistance(_))));
        assert!(kernel_eval(KernelKind::Laplace3D, -1.0).is_err());
    }

    #[test]
    fn helmholtz_at_pi() {
        // (i/4) H0(pi) with J0(pi), Y0(pi) from their power series.
        let x = PI;
        let mut j = 0.0;
        let mut term = 1.0;
        let mut harm = 0.0;
        let mut ysum = 0.0;
        for m in 0..60 {
            if m > 0 {
                term *= -(x * x / 4.0) / (m * m) as f64;
                harm += 1.0 / m as f64;
                ysum -= term * harm;
            }
            j += term;
        }
        let y = 2.0 / PI * ((x / 2.0).ln() + 0.577_215_664_901_532_9) * j + 2.0 / PI * ysum;
        let v = kernel_eval(KernelKind::Helmholtz2D { k: 2.0 * PI }, 0.5).unwrap();
        assert!((v.re + y / 4.0).abs() < 1e-12);
        assert!((v.im - j / 4.0).abs() < 1e-12);
    }
}
