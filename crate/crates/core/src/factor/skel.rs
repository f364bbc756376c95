//! Skeletonization of a single cluster against the current level matrix.

use crate::compression::{
    assemble_compression_matrix, near_field, proxy_surface, scaled_tolerance, split_by_sparsity, NearFieldSet,
    SpatialIndex, PROXY_RADIUS_FACTOR,
};
use crate::error::{Error, Result};
use crate::factor::state::ActiveState;
use crate::factor::{SkelRecord, Variant};
use crate::geometry::{Cluster, LevelTag};
use crate::linalg::{factor_block, interpolative_decompose, IdResult, Mat, Op};
use crate::problem::{assemble_block, KernelProblem};
use crate::scalar::Scalar;

/// Read-only context shared by every cluster of one level.
pub struct LevelContext<'a, T> {
    pub problem: &'a KernelProblem<T>,
    pub state: &'a ActiveState<T>,
    pub index: &'a SpatialIndex,
    pub tag: LevelTag,
    pub eps: f64,
    pub variant: Variant,
    pub use_proxy: bool,
    pub proxy_seed: u64,
}

/// A finished record plus the delta it writes on its skeleton block.
pub struct SkelOutput<T> {
    pub record: SkelRecord<T>,
    pub delta: Option<Mat<T>>,
}

/// Column ID of `y`, either at a single tolerance or group by group with
/// tolerances scaled by the kernel / delta norm ratio.
fn compress<T: Scalar>(y: &Mat<T>, ys: &Mat<T>, has_sci: bool, eps: f64, variant: Variant) -> IdResult<T> {
    let n = y.cols();
    if y.rows() == 0 {
        return IdResult::all_redundant(n);
    }
    if variant == Variant::Standard || !has_sci {
        return interpolative_decompose(y, eps);
    }
    let groups = split_by_sparsity(ys);
    let mut sk = Vec::new();
    let mut rd = Vec::new();
    let mut parts = Vec::new();
    for g in &groups {
        let yg = y.select_cols(g);
        let ysg = ys.select_cols(g);
        let ykg = yg.sub(&ysg);
        let tol = scaled_tolerance(&ykg, &ysg, eps);
        let id = interpolative_decompose(&yg, tol);
        sk.extend(id.sk.iter().map(|&i| g[i]));
        rd.extend(id.rd.iter().map(|&i| g[i]));
        parts.push(id);
    }
    let mut t = Mat::zeros(sk.len(), rd.len());
    let (mut r0, mut c0) = (0, 0);
    for id in &parts {
        for j in 0..id.t.cols() {
            for i in 0..id.t.rows() {
                t[(r0 + i, c0 + j)] = id.t[(i, j)];
            }
        }
        r0 += id.sk.len();
        c0 += id.rd.len();
    }
    IdResult { sk, rd, t }
}

/// `T_L^*` as an op on `T`: `T_L = conj(T)` for symmetric problems, `T` otherwise.
fn left_op(symmetric: bool) -> Op {
    if symmetric {
        Op::T
    } else {
        Op::C
    }
}

pub fn skeletonize_cluster<T: Scalar>(ctx: &LevelContext<'_, T>, cluster_id: usize, cluster: &Cluster) -> Result<SkelOutput<T>> {
    let problem = ctx.problem;
    let state = ctx.state;
    let c = &cluster.indices;
    let symmetric = problem.symmetric;
    let n_active = state.active.len();

    let proxy_ok = ctx.use_proxy && problem.has_kernel();
    let (near, proxy) = if proxy_ok {
        let radius = PROXY_RADIUS_FACTOR * cluster.width;
        let near = near_field(
            c,
            &cluster.center,
            radius,
            &problem.points,
            ctx.index,
            &state.is_active,
            n_active,
            &state.sci,
        );
        let proxy = (!near.far_empty).then(|| proxy_surface(&cluster.center, cluster.width, problem.spec.d, ctx.proxy_seed));
        (near, proxy)
    } else {
        let indices: Vec<usize> = state.active.iter().copied().filter(|i| c.binary_search(i).is_err()).collect();
        (NearFieldSet { indices, far_empty: true }, None)
    };

    let cm = assemble_compression_matrix(problem, c, &near, proxy.as_ref(), &state.sci, symmetric);
    let id = compress(&cm.y, &cm.ys, cm.has_sci(), ctx.eps, ctx.variant);

    let sk: Vec<usize> = id.sk.iter().map(|&i| c[i]).collect();
    let rd: Vec<usize> = id.rd.iter().map(|&i| c[i]).collect();
    let t = id.t;

    let a_cc = assemble_block(problem, c, c, &state.sci);
    let a_rr = a_cc.select(&id.rd, &id.rd);
    let a_rs = a_cc.select(&id.rd, &id.sk);
    let a_sr = a_cc.select(&id.sk, &id.rd);
    let a_ss = a_cc.select(&id.sk, &id.sk);
    let tl = left_op(symmetric);

    // B_rs = A_rs - T_L^* A_ss,  B_sr = A_sr - A_ss T,
    // B_rr = A_rr - T_L^* A_sr - A_rs T + T_L^* A_ss T = A_rr - T_L^* A_sr - B_rs T
    let mut b_rs = a_rs.clone();
    b_rs.sub_assign(&t.mul(tl, &a_ss, Op::N));
    let mut b_sr = a_sr.clone();
    b_sr.sub_assign(&a_ss.matmul(&t));
    let mut b_rr = a_rr;
    b_rr.sub_assign(&t.mul(tl, &a_sr, Op::N));
    b_rr.sub_assign(&b_rs.matmul(&t));
    if symmetric {
        symmetrize(&mut b_rr);
    }

    let rd_factor = factor_block(&b_rr, symmetric).map_err(|e| Error::SingularRedundantBlock {
        level: ctx.tag.to_string(),
        center: cluster.center.clone(),
        size: c.len(),
        rank: sk.len(),
        source: Box::new(e),
    })?;

    let delta = if sk.is_empty() || rd.is_empty() {
        None
    } else {
        let mut d = b_sr.matmul(&rd_factor.solve_mat(&b_rs));
        d.scale_mut(-T::one());
        if symmetric {
            symmetrize(&mut d);
        }
        Some(d)
    };

    Ok(SkelOutput {
        record: SkelRecord {
            cluster_id,
            center: cluster.center.clone(),
            sk,
            rd,
            t,
            rd_factor,
            b_rs,
            b_sr: (!symmetric).then_some(b_sr),
        },
        delta,
    })
}

/// Replaces `m` by `(m + m^T) / 2`.
fn symmetrize<T: Scalar>(m: &mut Mat<T>) {
    let n = m.rows();
    for j in 0..n {
        for i in j + 1..n {
            let v = (m[(i, j)] + m[(j, i)]).scale(0.5);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
