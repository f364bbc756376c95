use std::time::Instant;

use hifie::analysis::{
    estimate_forward_error_with, estimate_inverse_error_op, gmres_with, GmresOptions, PowerOptions,
};
use hifie::problem::KernelKind;
use hifie::{
    dense_matvec_operator, example1, example2, example5, example6, factorize, fft_matvec_operator,
    lippmann_schwinger_problem, Complex64, FactorOptions, FactorScheme, GridSpec, InverseOperator, KernelProblem,
    LevelTag, LinearOperator, Scalar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Example, ExperimentConfig, Oracle};
use crate::CliError;

/// Dense oracles up to this size are materialized once instead of being
/// regenerated on every matvec.
pub const MATERIALIZE_LIMIT: usize = 4096;

/// One measured (scheme, N) pair. Field order is the report column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub eps: f64,
    /// Size of the final skeleton set.
    #[serde(rename = "s_L")]
    pub s_l: usize,
    /// Factorization time in seconds.
    pub t_f: f64,
    /// Serialized factorization size in bytes.
    pub m_f: u64,
    pub t_a: f64,
    pub t_s: f64,
    pub e_a: Option<f64>,
    pub e_s: Option<f64>,
    pub n_i: Option<usize>,
    /// Process high-water mark in bytes, where the platform reports it.
    pub peak_memory: Option<u64>,
}

fn module_err(context: String) -> impl FnOnce(hifie::Error) -> CliError {
    move |source| CliError::Module { context, source }
}

fn grid(d: usize, n: usize, occupancy: Option<usize>) -> hifie::Result<GridSpec> {
    match occupancy {
        Some(o) => GridSpec::with_leaf_occupancy(d, n, o),
        None => GridSpec::default_for(d, n),
    }
}

fn real_problem(cfg: &ExperimentConfig, n: usize) -> hifie::Result<KernelProblem<f64>> {
    let occ = cfg.occupancy;
    match cfg.example {
        Example::Ex1 => example1(n, occ),
        Example::Ex2 => example2(n, occ),
        Example::Ex5 => example5(n, occ),
        Example::Ex6 => example6(n, occ),
        Example::Custom => {
            let c = &cfg.custom;
            let kind = if c.dim == 2 { KernelKind::Laplace2D } else { KernelKind::Laplace3D };
            let (a, b, cc) = (c.a, c.b, c.c);
            KernelProblem::new(kind, grid(c.dim, n, occ)?, move |_| a, move |_| b, move |_| cc)
                .map(|p| p.with_label("custom"))
        }
        Example::Ex3 => unreachable!("ex3 is complex"),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>, CliError> {
    cfg.validate()?;
    let skip = cfg.skip_tags()?;
    match cfg.example {
        Example::Ex3 => run_typed(cfg, &skip, |n| {
            lippmann_schwinger_problem(cfg.kappa, n, [0.5, 0.5], cfg.occupancy)
        }),
        _ => run_typed(cfg, &skip, |n| real_problem(cfg, n)),
    }
}

fn run_typed<T: Scalar>(
    cfg: &ExperimentConfig,
    skip: &[LevelTag],
    build: impl Fn(usize) -> hifie::Result<KernelProblem<T>>,
) -> Result<Vec<ReportRow>, CliError> {
    let problems = cfg
        .n
        .iter()
        .map(|&n| build(n).map_err(module_err(format!("building {} with n = {n}", cfg.example))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(cfg.schemes.len() * problems.len());
    for &scheme in &cfg.schemes {
        for p in &problems {
            log::info!("{} n = {} scheme {scheme}", cfg.example, p.spec.n);
            rows.push(measure(cfg, p, scheme, skip)?);
        }
    }
    Ok(rows)
}

fn random_vec<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n)
        .map(|_| {
            let re = rng.random::<f64>() - 0.5;
            if T::IS_COMPLEX {
                T::from_c64(Complex64::new(re, rng.random::<f64>() - 0.5)).expect("complex field")
            } else {
                T::from_f64(re)
            }
        })
        .collect()
}

fn oracle_operator<'a, T: Scalar>(
    cfg: &ExperimentConfig,
    p: &'a KernelProblem<T>,
) -> hifie::Result<Option<Box<dyn LinearOperator<T> + 'a>>> {
    Ok(match cfg.oracle {
        Oracle::None => None,
        Oracle::Fft => Some(Box::new(fft_matvec_operator(p)?)),
        Oracle::Dense => {
            let op = dense_matvec_operator(p)?;
            if p.n() <= MATERIALIZE_LIMIT {
                Some(Box::new(op.to_matrix()))
            } else {
                Some(Box::new(op))
            }
        }
    })
}

fn measure<T: Scalar>(
    cfg: &ExperimentConfig,
    p: &KernelProblem<T>,
    scheme: FactorScheme,
    skip: &[LevelTag],
) -> Result<ReportRow, CliError> {
    let ctx = |what: &str| format!("{what} ({} n = {}, {scheme}, eps = {:e})", cfg.example, p.spec.n, cfg.eps);
    let skip = if scheme == FactorScheme::Rskelf { Vec::new() } else { skip.to_vec() };
    let opts = FactorOptions::new(scheme, cfg.eps).with_skip(skip).with_threads(cfg.threads);

    let t = Instant::now();
    let f = factorize(p, &opts).map_err(module_err(ctx("factorization")))?;
    let t_f = t.elapsed().as_secs_f64();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = random_vec::<T>(p.n(), &mut rng);
    let t = Instant::now();
    f.apply(&x).map_err(module_err(ctx("apply")))?;
    let t_a = t.elapsed().as_secs_f64();
    let t = Instant::now();
    f.solve(&x).map_err(module_err(ctx("solve")))?;
    let t_s = t.elapsed().as_secs_f64();

    let mut row = ReportRow {
        scheme: scheme.name().to_string(),
        n: p.n(),
        eps: cfg.eps,
        s_l: f.terminal_ids.len(),
        t_f,
        m_f: f.serialized_size() as u64,
        t_a,
        t_s,
        e_a: None,
        e_s: None,
        n_i: None,
        peak_memory: None,
    };

    if let Some(a) = oracle_operator(cfg, p).map_err(module_err(ctx("oracle")))? {
        let power = PowerOptions {
            seed: cfg.seed,
            ..PowerOptions::default()
        };
        let e_a = estimate_forward_error_with(a.as_ref(), &f, power).map_err(module_err(ctx("e_a")))?;
        let e_s = estimate_inverse_error_op(a.as_ref(), &InverseOperator(&f), power)
            .map_err(module_err(ctx("e_s")))?;
        let b = random_vec::<T>(p.n(), &mut rng);
        let pre = |v: &[T]| f.solve(v).expect("length checked");
        let gopts = GmresOptions {
            side: cfg.precond_side.into(),
            ..GmresOptions::new(cfg.gmres_tol, cfg.gmres_maxit)
        };
        let out = gmres_with(a.as_ref(), &b, gopts, Some(&pre)).map_err(module_err(ctx("GMRES")))?;
        row.e_a = Some(e_a.value);
        row.e_s = Some(e_s.value);
        row.n_i = Some(out.iterations);
    }
    row.peak_memory = peak_memory_bytes();
    Ok(row)
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
