use std::collections::BTreeSet;

use hifie::analysis::{gmres, FnOperator};
use hifie::compression::{scaled_tolerance, scaled_tolerance_from_norms, split_by_sparsity};
use hifie::factor::state::SciStore;
use hifie::geometry::{build_level_plan, centers, partition, ClusterKind, Scheme};
use hifie::problem::{assemble_block, example1, example2, example6, lippmann_schwinger_problem, KernelKind};
use hifie::{
    factor_block, factorize, interpolative_decompose, two_norm_estimate, Complex64, FactorOptions, FactorScheme,
    Factorization, GridSpec, KernelProblem, LevelTag, Mat, Op, PointSet, Scalar,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn random_mat(rows: usize, cols: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mat::from_fn(rows, cols, |_, _| rng.random::<f64>() - 0.5)
}

fn squared_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn active_subset(n: usize, keep: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).filter(|_| rng.random::<f64>() < keep).collect()
}

fn check_partition(spec: &GridSpec, points: &PointSet, l: usize, kind: ClusterKind, active: &[usize]) {
    let clusters = partition(spec, points, l, kind, active);
    let mut seen = BTreeSet::new();
    for c in &clusters {
        assert!(!c.indices.is_empty());
        assert!(c.indices.windows(2).all(|w| w[0] < w[1]));
        for &i in &c.indices {
            assert!(seen.insert(i), "DOF {i} in two clusters");
        }
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), active);
    // Nearest-center assignment checked by brute force.
    let all = centers(spec, l, kind);
    for c in &clusters {
        for &i in &c.indices {
            let x = points.point(i);
            let best = all.iter().map(|z| squared_dist(x, z)).fold(f64::INFINITY, f64::min);
            let mine = squared_dist(x, &c.center);
            assert!(mine <= best * (1.0 + 1e-12) + 1e-15, "DOF {i}: {mine} vs {best}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partitions_cover_active_set_2d(l in 0usize..3, kind_ix in 0usize..2, keep in 0.2f64..1.0, seed in any::<u64>()) {
        let spec = GridSpec::new(2, 32, 3, 4).unwrap();
        let points = hifie::build_uniform_grid(&spec);
        let kind = [ClusterKind::Cell, ClusterKind::Edge][kind_ix];
        let active = active_subset(points.len(), keep, seed);
        check_partition(&spec, &points, l, kind, &active);
    }

    #[test]
    fn partitions_cover_active_set_3d(l in 0usize..2, kind_ix in 0usize..3, keep in 0.2f64..1.0, seed in any::<u64>()) {
        let spec = GridSpec::new(3, 8, 2, 2).unwrap();
        let points = hifie::build_uniform_grid(&spec);
        let kind = [ClusterKind::Cell, ClusterKind::Face, ClusterKind::Edge][kind_ix];
        let active = active_subset(points.len(), keep, seed);
        check_partition(&spec, &points, l, kind, &active);
    }

    #[test]
    fn cells_nest(l in 1usize..3, keep in 0.3f64..1.0, seed in any::<u64>()) {
        let spec = GridSpec::new(2, 32, 3, 4).unwrap();
        let points = hifie::build_uniform_grid(&spec);
        let active = active_subset(points.len(), keep, seed);
        let fine = partition(&spec, &points, l - 1, ClusterKind::Cell, &active);
        for coarse in partition(&spec, &points, l, ClusterKind::Cell, &active) {
            let children: Vec<_> = fine
                .iter()
                .filter(|c| c.indices.iter().any(|i| coarse.indices.binary_search(i).is_ok()))
                .collect();
            prop_assert!(children.len() <= 4);
            let mut union: Vec<usize> = children.iter().flat_map(|c| c.indices.iter().copied()).collect();
            union.sort_unstable();
            prop_assert_eq!(union, coarse.indices.clone());
        }
    }

    #[test]
    fn plans_are_deterministic(skip_half in any::<bool>()) {
        let spec = GridSpec::new(3, 16, 2, 4).unwrap();
        let skip = if skip_half { vec![LevelTag::parse("1/3").unwrap()] } else { vec![] };
        let a = build_level_plan(&spec, Scheme::Hifie, &skip).unwrap();
        let b = build_level_plan(&spec, Scheme::Hifie, &skip).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn id_decaying_spectrum(rows in 5usize..50, cols in 2usize..40, q in 0.2f64..0.9, tol_ix in 0usize..3, seed in any::<u64>()) {
        let tol = [1e-3, 1e-6, 1e-9][tol_ix];
        let mut m = random_mat(rows, cols, seed);
        let mut s = 1.0;
        for j in 0..cols {
            m.col_mut(j).iter_mut().for_each(|v| *v *= s);
            s *= q;
        }
        let id = interpolative_decompose(&m, tol);
        let k = id.rank();
        let mn = two_norm_estimate(&m);
        let res = two_norm_estimate(&id.residual(&m));
        // Pivot-magnitude stopping bounds the residual by sqrt(n - k) times the cutoff.
        prop_assert!(res <= 1.05 * ((cols - k) as f64).sqrt() * tol * mn + 1e-13 * mn);
        if k > 0 && k < cols {
            prop_assert!(two_norm_estimate(&id.t) <= 4.0 * ((k * (cols - k)) as f64).sqrt());
        }
        let again = interpolative_decompose(&m, tol);
        prop_assert_eq!(&again.sk, &id.sk);
        prop_assert_eq!(again.t.as_slice(), id.t.as_slice());
    }

    #[test]
    fn id_sk_rd_partition_columns(rows in 1usize..30, cols in 1usize..30, seed in any::<u64>()) {
        let m = random_mat(rows, cols, seed);
        let id = interpolative_decompose(&m, 1e-8);
        let mut all: Vec<usize> = id.sk.iter().chain(&id.rd).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..cols).collect::<Vec<_>>());
        prop_assert_eq!((id.t.rows(), id.t.cols()), (id.sk.len(), id.rd.len()));
    }

    #[test]
    fn block_round_trip(n in 1usize..40, symmetric in any::<bool>(), shift in 0.5f64..5.0, seed in any::<u64>()) {
        let mut b = random_mat(n, n, seed);
        if symmetric {
            b = Mat::from_fn(n, n, |i, j| b[(i, j)] + b[(j, i)]);
        }
        for i in 0..n {
            b[(i, i)] += shift * if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let f = factor_block(&b, symmetric).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = random_vec::<f64>(n, &mut rng);
        let y = f.solve(&x);
        prop_assert!(rel_diff(&b.matvec(Op::N, &y), &x) <= 1e-10 * (1.0 + two_norm_estimate(&b) * 1e3));
        let rec = f.reconstruct();
        let mut diff = rec.clone();
        diff.sub_assign(&b);
        prop_assert!(diff.norm_fro() <= 1e-12 * b.norm_fro().max(1.0) * n as f64);
    }

    #[test]
    fn sparsity_groups_are_permutation_invariant(rows in 1usize..20, cols in 1usize..25, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Columns drawn from a handful of support patterns.
        let patterns: Vec<Vec<bool>> = (0..4).map(|_| (0..rows).map(|_| rng.random_bool(0.5)).collect()).collect();
        let ys = Mat::from_fn(rows, cols, |_, _| 0.0);
        let choice: Vec<usize> = (0..cols).map(|_| rng.random_range(0..4)).collect();
        let ys = {
            let mut m = ys;
            for j in 0..cols {
                for i in 0..rows {
                    if patterns[choice[j]][i] {
                        m[(i, j)] = 1.0 + rng.random::<f64>();
                    }
                }
            }
            m
        };
        let groups = split_by_sparsity(&ys);
        let mut all: Vec<usize> = groups.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(&all, &(0..cols).collect::<Vec<_>>());
        let mut perm: Vec<usize> = (0..cols).collect();
        for i in (1..cols).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let permuted = split_by_sparsity(&ys.select_cols(&perm));
        let canon = |gs: Vec<Vec<usize>>| -> BTreeSet<Vec<usize>> {
            gs.into_iter().map(|mut g| { g.sort_unstable(); g }).collect()
        };
        let relabeled: Vec<Vec<usize>> = permuted.into_iter().map(|g| g.into_iter().map(|i| perm[i]).collect()).collect();
        prop_assert_eq!(canon(groups), canon(relabeled));
    }

    #[test]
    fn scaled_tolerance_never_exceeds_eps(yk in 0.0f64..10.0, ys in 0.0f64..10.0, eps in 1e-12f64..1e-1) {
        let t = scaled_tolerance_from_norms(yk, ys, eps);
        prop_assert!(t <= eps && t >= 0.0);
        let zero = Mat::<f64>::zeros(3, 2);
        prop_assert_eq!(scaled_tolerance(&random_mat(3, 2, 1), &zero, eps), eps);
    }

    #[test]
    fn kernel_blocks_are_exactly_symmetric(seed in any::<u64>()) {
        let p = example2(16, Some(16)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<usize> = (0..20).map(|_| rng.random_range(0..p.n())).collect();
        let cols: Vec<usize> = (0..15).map(|_| rng.random_range(0..p.n())).collect();
        let sci = SciStore::new(p.n());
        let a = assemble_block(&p, &rows, &cols, &sci);
        let b = assemble_block(&p, &cols, &rows, &sci);
        prop_assert_eq!(a, b.transpose());
    }
}

fn small_problems() -> Vec<(String, KernelProblem<f64>)> {
    let spec = GridSpec::with_leaf_occupancy(2, 16, 16).unwrap();
    let general = KernelProblem::new(KernelKind::Laplace2D, spec, |x| 1.0 + x[1], |x| 1.0 + x[0], |x| 2.0 - x[1]).unwrap();
    vec![
        ("ex1".into(), example1(16, Some(16)).unwrap()),
        ("ex2".into(), example2(16, Some(16)).unwrap()),
        ("general".into(), general),
        ("ex6".into(), example6(8, Some(64)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn inverse_pair_and_adjoint_identities(which in 0usize..4, scheme_ix in 0usize..3, eps_exp in 2i32..10, seed in any::<u64>()) {
        let (_, p) = small_problems().swap_remove(which);
        let scheme = FactorScheme::ALL[scheme_ix];
        let f = factorize(&p, &FactorOptions::new(scheme, 10f64.powi(-eps_exp))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_vec::<f64>(p.n(), &mut rng);
        let y = random_vec::<f64>(p.n(), &mut rng);
        prop_assert!(rel_diff(&f.solve(&f.apply(&x).unwrap()).unwrap(), &x) <= 1e-9);
        prop_assert!(rel_diff(&f.solve_adjoint(&f.apply_adjoint(&x).unwrap()).unwrap(), &x) <= 1e-9);
        let fx = f.apply(&x).unwrap();
        let fty = f.apply_adjoint(&y).unwrap();
        let lhs: f64 = y.iter().zip(&fx).map(|(a, b)| a * b).sum();
        let rhs: f64 = fty.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
        if p.symmetric {
            prop_assert!(rel_diff(&fx, &f.apply_adjoint(&x).unwrap()) <= 1e-11);
        }
        let counts = f.active_counts();
        prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn complex_adjoint_identity(scheme_ix in 0usize..3, seed in any::<u64>()) {
        let p = lippmann_schwinger_problem(2.0, 16, [0.4, 0.6], Some(16)).unwrap();
        let f = factorize(&p, &FactorOptions::new(FactorScheme::ALL[scheme_ix], 1e-6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_vec::<Complex64>(p.n(), &mut rng);
        let y = random_vec::<Complex64>(p.n(), &mut rng);
        let lhs = hifie::scalar::dotc(&y, &f.apply(&x).unwrap());
        let rhs = hifie::scalar::dotc(&f.apply_adjoint(&y).unwrap(), &x);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1.0));
        prop_assert!(rel_diff(&f.solve(&f.apply(&x).unwrap()).unwrap(), &x) <= 1e-9);
    }

    #[test]
    fn serialization_round_trips(which in 0usize..4, scheme_ix in 0usize..3) {
        let (_, p) = small_problems().swap_remove(which);
        let f = factorize(&p, &FactorOptions::new(FactorScheme::ALL[scheme_ix], 1e-5)).unwrap();
        let bytes = f.to_bytes();
        let g = Factorization::<f64>::from_bytes(&bytes).unwrap();
        prop_assert_eq!(g.to_bytes(), bytes);
    }

    #[test]
    fn gmres_residuals_do_not_increase(n in 5usize..60, scale in 0.01f64..0.9, seed in any::<u64>()) {
        let e = random_mat(n, n, seed);
        let norm = two_norm_estimate(&e);
        let op = FnOperator {
            n,
            apply: |x: &[f64]| {
                let mut y = e.matvec(Op::N, x);
                y.iter_mut().zip(x).for_each(|(a, b)| *a = *a * scale / norm + b);
                y
            },
            apply_adjoint: |x: &[f64]| {
                let mut y = e.matvec(Op::C, x);
                y.iter_mut().zip(x).for_each(|(a, b)| *a = *a * scale / norm + b);
                y
            },
            label: "I + E".into(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let b = random_vec::<f64>(n, &mut rng);
        let out = gmres(&op, &b, 1e-12, 200, None).unwrap();
        prop_assert!(out.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    }
}

#[test]
fn factorization_is_deterministic() {
    let p = example2(32, Some(16)).unwrap();
    let opts = FactorOptions::new(FactorScheme::HifieX, 1e-6);
    let a = factorize(&p, &opts).unwrap().to_bytes();
    let b = factorize(&p, &opts.clone().with_threads(Some(2))).unwrap().to_bytes();
    assert_eq!(a, b);
}

#[test]
fn skipping_fractional_levels_still_factors() {
    let p = example1(32, Some(16)).unwrap();
    let skip = vec![LevelTag::parse("1/2").unwrap()];
    let f = hifie::hifie_factor(&p, 1e-6, hifie::Variant::Standard, &skip).unwrap();
    assert!(f.levels.iter().all(|l| l.tag != skip[0]));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_vec::<f64>(p.n(), &mut rng);
    assert!(rel_diff(&f.solve(&f.apply(&x).unwrap()).unwrap(), &x) <= 1e-9);
    assert!(hifie::hifie_factor(&p, 1e-6, hifie::Variant::Standard, &[LevelTag::integer(1)]).is_err());
}
