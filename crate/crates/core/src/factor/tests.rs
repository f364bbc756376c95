use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::factor::state::SciStore;
use crate::linalg::Op;
use crate::problem::{example1, example2, lippmann_schwinger_problem, EntryGenerator};

fn dense<T: Scalar>(p: &KernelProblem<T>) -> Mat<T> {
    let all: Vec<usize> = (0..p.n()).collect();
    assemble_block(p, &all, &all, &SciStore::new(p.n()))
}

fn random_vec<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n)
        .map(|_| {
            let z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            T::from_c64(z).unwrap_or_else(|| T::from_f64(z.re))
        })
        .collect()
}

fn rel_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (*x - *y).abs2()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.abs2()).sum::<f64>().sqrt();
    num / den
}

/// Max over a few random vectors of |Fx - Ax| / |Ax|.
fn forward_error<T: Scalar>(f: &Factorization<T>, a: &Mat<T>, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..4)
        .map(|_| {
            let x = random_vec::<T>(a.cols(), &mut rng);
            rel_diff(&f.apply(&x).unwrap(), &a.matvec(Op::N, &x))
        })
        .fold(0.0, f64::max)
}

#[test]
fn tight_tolerance_reproduces_the_matrix() {
    let p = example2(16, Some(16)).unwrap();
    let a = dense(&p);
    for scheme in FactorScheme::ALL {
        let f = factorize(&p, &FactorOptions::new(scheme, 1e-13)).unwrap();
        let e = forward_error(&f, &a, 1);
        assert!(e < 1e-11, "{scheme}: {e}");
    }
}

#[test]
fn schemes_meet_tolerance_on_first_kind_problem() {
    let p = example1(32, Some(16)).unwrap();
    let a = dense(&p);
    for scheme in FactorScheme::ALL {
        for eps in [1e-3, 1e-6] {
            let f = factorize(&p, &FactorOptions::new(scheme, eps)).unwrap();
            let e = forward_error(&f, &a, 2);
            eprintln!("{scheme} eps={eps}: e={e:.2e} terminal={} counts={:?}", f.terminal_ids.len(), f.active_counts());
            assert!(e < 10.0 * eps, "{scheme} eps={eps}: {e}");
        }
    }
}

#[test]
fn solve_inverts_apply() {
    let p = example2(32, Some(16)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for scheme in FactorScheme::ALL {
        let f = factorize(&p, &FactorOptions::new(scheme, 1e-6)).unwrap();
        let x = random_vec::<f64>(p.n(), &mut rng);
        let y = f.solve(&f.apply(&x).unwrap()).unwrap();
        assert!(rel_diff(&y, &x) < 1e-10);
        let y = f.solve_adjoint(&f.apply_adjoint(&x).unwrap()).unwrap();
        assert!(rel_diff(&y, &x) < 1e-10);
    }
}

#[test]
fn adjoint_is_consistent_for_complex_problem() {
    let p = lippmann_schwinger_problem(2.0, 32, [0.5, 0.5], Some(16)).unwrap();
    let a = dense(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for scheme in FactorScheme::ALL {
        let f = factorize(&p, &FactorOptions::new(scheme, 1e-6)).unwrap();
        let e = forward_error(&f, &a, 5);
        assert!(e < 1e-5, "{scheme}: {e}");
        let x = random_vec::<Complex64>(p.n(), &mut rng);
        let y = random_vec::<Complex64>(p.n(), &mut rng);
        let lhs = crate::scalar::dotc(&y, &f.apply(&x).unwrap());
        let rhs = crate::scalar::dotc(&f.apply_adjoint(&y).unwrap(), &x);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        let z = f.solve(&f.apply(&x).unwrap()).unwrap();
        assert!(rel_diff(&z, &x) < 1e-10);
    }
}

#[test]
fn general_problem_keeps_both_couplings() {
    let spec = GridSpec::with_leaf_occupancy(2, 16, 16).unwrap();
    let p = KernelProblem::new(crate::problem::KernelKind::Laplace2D, spec, |_| 1.0, |x| 1.0 + x[0], |x| 2.0 - x[1]).unwrap();
    assert!(!p.symmetric);
    let a = dense(&p);
    let f = factorize(&p, &FactorOptions::new(FactorScheme::HifieX, 1e-8)).unwrap();
    assert!(f.levels.iter().flat_map(|l| &l.records).all(|r| r.b_sr.is_some()));
    assert!(forward_error(&f, &a, 6) < 1e-7);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_vec::<f64>(p.n(), &mut rng);
    let y = random_vec::<f64>(p.n(), &mut rng);
    let lhs = crate::scalar::dotc(&y, &f.apply(&x).unwrap());
    let rhs = crate::scalar::dotc(&f.apply_adjoint(&y).unwrap(), &x);
    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
}

#[test]
fn explicit_matrix_without_proxy() {
    let spec = GridSpec::with_leaf_occupancy(2, 8, 16).unwrap();
    let n = spec.num_points();
    let kp = example2(8, Some(16)).unwrap();
    let m = Mat::from_fn(n, n, |i, j| kp.entry(i, j));
    let p = KernelProblem::explicit(spec, m.clone()).unwrap();
    let f = factorize(&p, &FactorOptions::new(FactorScheme::Hifie, 1e-12)).unwrap();
    assert!(forward_error(&f, &m, 8) < 1e-10);
}

#[test]
fn dimension_mismatch_is_reported() {
    let p = example2(8, Some(16)).unwrap();
    let f = rsf_factor(&p, 1e-6).unwrap();
    assert!(matches!(f.apply(&[0.0; 3]), Err(Error::DimensionMismatch { expected: 64, got: 3 })));
    assert!(matches!(f.solve(&[0.0; 65]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn serialization_round_trip() {
    let p = lippmann_schwinger_problem(1.0, 16, [0.5, 0.5], Some(16)).unwrap();
    let f = factorize(&p, &FactorOptions::new(FactorScheme::HifieX, 1e-6)).unwrap();
    let bytes = f.to_bytes();
    assert_eq!(bytes.len(), f.serialized_size());
    let g = Factorization::<Complex64>::from_bytes(&bytes).unwrap();
    assert_eq!(g.to_bytes(), bytes);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_vec::<Complex64>(p.n(), &mut rng);
    assert_eq!(f.apply(&x).unwrap(), g.apply(&x).unwrap());
    assert!(matches!(Factorization::<f64>::from_bytes(&bytes), Err(Error::ScalarFieldMismatch(_))));
    assert!(matches!(Factorization::<Complex64>::from_bytes(&bytes[..bytes.len() - 3]), Err(Error::Io(_))));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Factorization::<Complex64>::from_bytes(&bad), Err(Error::Format(_))));
}

#[test]
fn elimination_is_monotone_and_disjoint() {
    let p = example1(32, Some(16)).unwrap();
    let f = factorize(&p, &FactorOptions::new(FactorScheme::Hifie, 1e-6)).unwrap();
    let mut seen = vec![false; p.n()];
    let mut prev = p.n();
    for l in &f.levels {
        assert_eq!(l.active_before, prev);
        assert!(l.active_after <= l.active_before);
        prev = l.active_after;
        for r in &l.records {
            for &i in &r.rd {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
    }
    for &i in &f.terminal_ids {
        assert!(!seen[i]);
        seen[i] = true;
    }
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn bad_tolerance_is_rejected() {
    let p = example2(8, Some(16)).unwrap();
    assert!(matches!(rsf_factor(&p, 0.0), Err(Error::InvalidSpec(_))));
    assert!(matches!(rsf_factor(&p, 1.5), Err(Error::InvalidSpec(_))));
}
