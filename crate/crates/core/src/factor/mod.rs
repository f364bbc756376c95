//! Recursive skeletonization (RSF) and hierarchical interpolative
//! factorization (HIF-IE) of kernel matrices.

mod apply;
pub mod io;
pub mod skel;
pub mod state;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::compression::{SpatialIndex, PROXY_SEED};
use crate::error::{Error, Result};
use crate::geometry::{build_level_plan, ClusterKind, GridSpec, LevelTag, Scheme};
use crate::linalg::{factor_block, BlockFactor, Mat};
use crate::problem::{assemble_block, KernelProblem};
use crate::scalar::Scalar;

use skel::{skeletonize_cluster, LevelContext};
use state::ActiveState;

/// How redundant DOFs are selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// One ID of the whole compression matrix at tolerance `eps`.
    Standard,
    /// Columns split by delta sparsity, each group compressed at a
    /// tolerance scaled by its kernel to delta norm ratio.
    SecondKind,
}

/// The three factorizations compared by the benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorScheme {
    Rskelf,
    Hifie,
    HifieX,
}

impl FactorScheme {
    pub const ALL: [FactorScheme; 3] = [FactorScheme::Rskelf, FactorScheme::Hifie, FactorScheme::HifieX];

    pub fn name(self) -> &'static str {
        match self {
            FactorScheme::Rskelf => "rskelf",
            FactorScheme::Hifie => "hifie",
            FactorScheme::HifieX => "hifie_x",
        }
    }

    pub fn geometry(self) -> Scheme {
        match self {
            FactorScheme::Rskelf => Scheme::Rsf,
            _ => Scheme::Hifie,
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            FactorScheme::HifieX => Variant::SecondKind,
            _ => Variant::Standard,
        }
    }
}

impl fmt::Display for FactorScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FactorScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rskelf" | "rsf" => Ok(FactorScheme::Rskelf),
            "hifie" => Ok(FactorScheme::Hifie),
            "hifie_x" | "hifie-x" | "hifiex" => Ok(FactorScheme::HifieX),
            other => Err(Error::InvalidSpec(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorOptions {
    pub scheme: FactorScheme,
    pub eps: f64,
    /// Fractional levels left out of the HIF-IE sequence.
    pub skip: Vec<LevelTag>,
    /// Compress against a proxy surface instead of every far DOF. Ignored
    /// (treated as false) for explicit matrices.
    pub proxy: bool,
    pub proxy_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl FactorOptions {
    pub fn new(scheme: FactorScheme, eps: f64) -> Self {
        Self {
            scheme,
            eps,
            skip: Vec::new(),
            proxy: true,
            proxy_seed: PROXY_SEED,
            threads: None,
        }
    }

    pub fn with_skip(mut self, skip: Vec<LevelTag>) -> Self {
        self.skip = skip;
        self
    }

    pub fn with_proxy(mut self, proxy: bool) -> Self {
        self.proxy = proxy;
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }
}

/// Everything needed to undo the skeletonization of one cluster.
#[derive(Clone, Debug)]
pub struct SkelRecord<T> {
    pub cluster_id: usize,
    pub center: Vec<f64>,
    /// Global skeleton DOFs.
    pub sk: Vec<usize>,
    /// Global redundant DOFs.
    pub rd: Vec<usize>,
    /// Interpolation matrix `T` (`|sk| x |rd|`), `A_{:,rd} ≈ A_{:,sk} T`.
    pub t: Mat<T>,
    /// Factor of the decoupled redundant block `B_rr`.
    pub rd_factor: BlockFactor<T>,
    pub b_rs: Mat<T>,
    /// `B_sr`; absent for symmetric problems where it equals `B_rs^T`.
    pub b_sr: Option<Mat<T>>,
}

impl<T: Scalar> SkelRecord<T> {
    /// Scalars held by this record.
    pub fn stored_len(&self) -> usize {
        self.t.as_slice().len()
            + self.rd_factor.stored_len()
            + self.b_rs.as_slice().len()
            + self.b_sr.as_ref().map_or(0, |m| m.as_slice().len())
    }
}

#[derive(Clone, Debug)]
pub struct FactorLevel<T> {
    pub tag: LevelTag,
    pub kind: ClusterKind,
    pub records: Vec<SkelRecord<T>>,
    /// Active DOF count before and after this level.
    pub active_before: usize,
    pub active_after: usize,
}

/// A multiplicative factorization `F ≈ A` with fast apply and solve.
#[derive(Clone, Debug)]
pub struct Factorization<T> {
    pub scheme: FactorScheme,
    pub eps: f64,
    pub spec: GridSpec,
    pub n: usize,
    pub symmetric: bool,
    pub levels: Vec<FactorLevel<T>>,
    /// DOFs of the final dense block, sorted.
    pub terminal_ids: Vec<usize>,
    pub terminal: BlockFactor<T>,
}

impl<T: Scalar> Factorization<T> {
    /// Total scalars stored.
    pub fn stored_len(&self) -> usize {
        self.levels.iter().flat_map(|l| &l.records).map(SkelRecord::stored_len).sum::<usize>()
            + self.terminal.stored_len()
    }

    pub fn num_records(&self) -> usize {
        self.levels.iter().map(|l| l.records.len()).sum()
    }

    /// Active counts after each level, followed by the terminal size.
    pub fn active_counts(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.levels.iter().map(|l| l.active_after).collect();
        v.push(self.terminal_ids.len());
        v
    }
}

/// RSF: cells only, single-tolerance IDs.
pub fn rsf_factor<T: Scalar>(problem: &KernelProblem<T>, eps: f64) -> Result<Factorization<T>> {
    factorize(problem, &FactorOptions::new(FactorScheme::Rskelf, eps))
}

/// HIF-IE with the given compression variant and skipped fractional levels.
pub fn hifie_factor<T: Scalar>(
    problem: &KernelProblem<T>,
    eps: f64,
    variant: Variant,
    skip: &[LevelTag],
) -> Result<Factorization<T>> {
    let scheme = match variant {
        Variant::Standard => FactorScheme::Hifie,
        Variant::SecondKind => FactorScheme::HifieX,
    };
    factorize(problem, &FactorOptions::new(scheme, eps).with_skip(skip.to_vec()))
}

pub fn factorize<T: Scalar>(problem: &KernelProblem<T>, opts: &FactorOptions) -> Result<Factorization<T>> {
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return Err(Error::InvalidSpec(format!("tolerance must lie in (0, 1), got {}", opts.eps)));
    }
    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
            pool.install(|| factorize_inner(problem, opts))
        }
        None => factorize_inner(problem, opts),
    }
}

fn factorize_inner<T: Scalar>(problem: &KernelProblem<T>, opts: &FactorOptions) -> Result<Factorization<T>> {
    let n = problem.n();
    let spec = problem.spec;
    let plan = build_level_plan(&spec, opts.scheme.geometry(), &opts.skip)?;
    let mut state = ActiveState::<T>::new(n);
    let mut levels = Vec::with_capacity(plan.levels.len());
    let use_proxy = opts.proxy && problem.has_kernel();

    for level in &plan.levels {
        let clusters = plan.partition(level, &problem.points, &state.active);
        let index = SpatialIndex::new(&problem.points, &state.active, spec.cell_width(level.l));
        let ctx = LevelContext {
            problem,
            state: &state,
            index: &index,
            tag: level.tag,
            eps: opts.eps,
            variant: opts.scheme.variant(),
            use_proxy,
            proxy_seed: opts.proxy_seed,
        };
        let outputs = clusters
            .par_iter()
            .enumerate()
            .map(|(id, c)| skeletonize_cluster(&ctx, id, c))
            .collect::<Result<Vec<_>>>()?;

        let active_before = state.active.len();
        let mut records = Vec::with_capacity(outputs.len());
        let mut eliminated = Vec::new();
        for out in outputs {
            if let Some(delta) = out.delta {
                state.sci.push(out.record.sk.clone(), delta);
            }
            eliminated.extend_from_slice(&out.record.rd);
            records.push(out.record);
        }
        state.deactivate(&eliminated);
        state.tag = Some(level.tag);
        log::debug!(
            "level {} ({}): {} clusters, active {} -> {}",
            level.tag,
            level.kind,
            records.len(),
            active_before,
            state.active.len()
        );
        levels.push(FactorLevel {
            tag: level.tag,
            kind: level.kind,
            records,
            active_before,
            active_after: state.active.len(),
        });
    }

    let terminal_ids = state.active.clone();
    let block = assemble_block(problem, &terminal_ids, &terminal_ids, &state.sci);
    let terminal = factor_block(&block, problem.symmetric).map_err(|e| Error::SingularRedundantBlock {
        level: "terminal".into(),
        center: vec![0.5; spec.d],
        size: terminal_ids.len(),
        rank: 0,
        source: Box::new(e),
    })?;

    Ok(Factorization {
        scheme: opts.scheme,
        eps: opts.eps,
        spec,
        n,
        symmetric: problem.symmetric,
        levels,
        terminal_ids,
        terminal,
    })
}

#[cfg(test)]
mod tests;
