//! Reduced compression matrices for cluster skeletonization: proxy surfaces,
//! near fields that account for Schur complement deltas, and the column
//! splitting used by the second-kind variant.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::factor::state::SciStore;
use crate::geometry::PointSet;
use crate::linalg::{two_norm_estimate, Mat};
use crate::problem::KernelProblem;
use crate::scalar::Scalar;

/// Proxy radius as a multiple of the cluster width.
pub const PROXY_RADIUS_FACTOR: f64 = 1.5;
pub const PROXY_POINTS_2D: usize = 64;
pub const PROXY_POINTS_3D: usize = 512;
/// Seed for the random sphere sampling in 3D.
pub const PROXY_SEED: u64 = 0x4849_4649_4531;

#[derive(Clone, Debug, PartialEq)]
pub struct ProxySurface {
    pub d: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Flattened coordinates, `d` per point.
    pub points: Vec<f64>,
    /// Surface measure divided by the point count.
    pub weights: Vec<f64>,
}

impl ProxySurface {
    pub fn len(&self) -> usize {
        self.points.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }
}

/// Circle of 64 equispaced points (2D) or 512 normalized Gaussian samples
/// (3D) at radius `1.5 * width` around `center`.
pub fn proxy_surface(center: &[f64], width: f64, d: usize, seed: u64) -> ProxySurface {
    assert!(width > 0.0, "proxy width must be positive");
    assert_eq!(center.len(), d);
    let radius = PROXY_RADIUS_FACTOR * width;
    let mut points = Vec::new();
    let count;
    let measure;
    if d == 2 {
        count = PROXY_POINTS_2D;
        measure = 2.0 * PI * radius;
        for i in 0..count {
            let t = 2.0 * PI * i as f64 / count as f64;
            points.push(center[0] + radius * t.cos());
            points.push(center[1] + radius * t.sin());
        }
    } else {
        count = PROXY_POINTS_3D;
        measure = 4.0 * PI * radius * radius;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut i = 0;
        while i < count {
            let v: [f64; 3] = [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ];
            let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if nv < 1e-12 {
                continue;
            }
            for k in 0..3 {
                points.push(center[k] + radius * v[k] / nv);
            }
            i += 1;
        }
    }
    ProxySurface {
        d,
        center: center.to_vec(),
        radius,
        points,
        weights: vec![measure / count as f64; count],
    }
}

/// Buckets the active DOFs by leaf-sized boxes for ball queries.
pub struct SpatialIndex {
    d: usize,
    box_width: f64,
    boxes_per_axis: usize,
    buckets: Vec<Vec<usize>>,
}

impl SpatialIndex {
    pub fn new(points: &PointSet, active: &[usize], box_width: f64) -> Self {
        let d = points.d;
        let boxes_per_axis = ((1.0 / box_width).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); boxes_per_axis.pow(d as u32)];
        for &i in active {
            let b = Self::bucket_of(points.point(i), box_width, boxes_per_axis);
            buckets[b].push(i);
        }
        Self {
            d,
            box_width,
            boxes_per_axis,
            buckets,
        }
    }

    fn axis_box(x: f64, w: f64, nb: usize) -> usize {
        ((x / w).floor().max(0.0) as usize).min(nb - 1)
    }

    fn bucket_of(x: &[f64], w: f64, nb: usize) -> usize {
        let mut b = 0;
        for &xi in x.iter().rev() {
            b = b * nb + Self::axis_box(xi, w, nb);
        }
        b
    }

    /// Indexed DOFs strictly inside the ball, in ascending order.
    pub fn ball(&self, points: &PointSet, center: &[f64], radius: f64) -> Vec<usize> {
        let nb = self.boxes_per_axis;
        let lo: Vec<usize> = (0..self.d).map(|a| Self::axis_box(center[a] - radius, self.box_width, nb)).collect();
        let hi: Vec<usize> = (0..self.d).map(|a| Self::axis_box(center[a] + radius, self.box_width, nb)).collect();
        let mut out = Vec::new();
        let mut idx = lo.clone();
        loop {
            let mut b = 0;
            for a in (0..self.d).rev() {
                b = b * nb + idx[a];
            }
            for &i in &self.buckets[b] {
                if points.dist(i, center) < radius {
                    out.push(i);
                }
            }
            let mut a = 0;
            while a < self.d {
                idx[a] += 1;
                if idx[a] <= hi[a] {
                    break;
                }
                idx[a] = lo[a];
                a += 1;
            }
            if a == self.d {
                break;
            }
        }
        out.sort_unstable();
        out
    }
}

/// DOFs outside a cluster that must be kept as explicit rows.
#[derive(Clone, Debug, PartialEq)]
pub struct NearFieldSet {
    /// Sorted near-field DOFs.
    pub indices: Vec<usize>,
    /// No active DOF lies outside the cluster and its near field.
    pub far_empty: bool,
}

/// Active DOFs within the proxy radius plus every active DOF sharing a
/// delta block with a member of the cluster.
#[allow(clippy::too_many_arguments)]
pub fn near_field<T: Scalar>(
    cluster: &[usize],
    center: &[f64],
    radius: f64,
    points: &PointSet,
    index: &SpatialIndex,
    is_active: &[bool],
    n_active: usize,
    sci: &SciStore<T>,
) -> NearFieldSet {
    debug_assert!(cluster.windows(2).all(|w| w[0] < w[1]));
    let in_c = |i: usize| cluster.binary_search(&i).is_ok();
    let mut near: Vec<usize> = index.ball(points, center, radius).into_iter().filter(|&i| !in_c(i)).collect();
    let mut extra = Vec::new();
    for &i in cluster {
        for &(did, _) in sci.deltas_of(i) {
            for &j in &sci.delta(did as usize).ids {
                if is_active[j] && !in_c(j) {
                    extra.push(j);
                }
            }
        }
    }
    if !extra.is_empty() {
        near.extend(extra);
        near.sort_unstable();
        near.dedup();
    }
    let far_empty = cluster.len() + near.len() >= n_active;
    NearFieldSet { indices: near, far_empty }
}

/// Stacked compression matrix `Y_c` with its delta part `Y^S`.
#[derive(Clone, Debug)]
pub struct CompressionMatrix<T> {
    pub y: Mat<T>,
    /// Delta overlay part of `y` (zero outside S-tagged rows).
    pub ys: Mat<T>,
    /// Rows holding at least one nonzero delta entry.
    pub s_rows: Vec<bool>,
    pub near_rows: usize,
    pub proxy_rows: usize,
}

impl<T: Scalar> CompressionMatrix<T> {
    pub fn has_sci(&self) -> bool {
        self.s_rows.iter().any(|&s| s)
    }

    /// Kernel part `Y^K = Y - Y^S`.
    pub fn yk(&self) -> Mat<T> {
        self.y.sub(&self.ys)
    }
}

/// Builds `[A_{N,c}; Y_{E,c}]` for symmetric problems, and
/// `[A_{N,c}; A_{c,N}^*; Y_{E,c}; Y_{c,E}^*]` otherwise.
pub fn assemble_compression_matrix<T: Scalar>(
    problem: &KernelProblem<T>,
    cluster: &[usize],
    near: &NearFieldSet,
    proxy: Option<&ProxySurface>,
    sci: &SciStore<T>,
    symmetric: bool,
) -> CompressionMatrix<T> {
    use crate::problem::EntryGenerator;
    let nc = cluster.len();
    let nn = near.indices.len();
    let ne = proxy.map_or(0, |p| p.len());
    let blocks = if symmetric { 1 } else { 2 };
    let rows = blocks * (nn + ne);
    let mut y = Mat::zeros(rows, nc);
    let mut ys = Mat::zeros(rows, nc);

    let a_nc = problem.block(&near.indices, cluster);
    let s_nc = sci.overlay(&near.indices, cluster);
    let mut parts: Vec<(Mat<T>, Mat<T>)> = vec![(a_nc, s_nc)];
    if !symmetric {
        let a_cn = problem.block(cluster, &near.indices).adjoint();
        let s_cn = sci.overlay(cluster, &near.indices).adjoint();
        parts.push((a_cn, s_cn));
    }
    let mut off = 0;
    for (k, s) in &parts {
        for j in 0..nc {
            for i in 0..nn {
                y[(off + i, j)] = k[(i, j)] + s[(i, j)];
                ys[(off + i, j)] = s[(i, j)];
            }
        }
        off += nn;
    }
    if let Some(px) = proxy {
        let w = problem.weight();
        for j in 0..nc {
            let cj = cluster[j];
            for e in 0..ne {
                let kv = problem.kind.eval::<T>(problem.points.dist(cj, px.point(e))).scale(w);
                y[(off + e, j)] = kv * problem.c[cj];
                if !symmetric {
                    y[(off + ne + e, j)] = (problem.b[cj] * kv).conj();
                }
            }
        }
    }
    let s_rows = (0..rows).map(|i| (0..nc).any(|j| ys[(i, j)] != T::zero())).collect();
    CompressionMatrix {
        y,
        ys,
        s_rows,
        near_rows: nn,
        proxy_rows: ne,
    }
}

/// `ρ ε` with `ρ = min(1, ‖Y^K‖ / ‖Y^S‖)`; plain `ε` when `Y^S = 0`.
pub fn scaled_tolerance_from_norms(yk_norm: f64, ys_norm: f64, eps: f64) -> f64 {
    if ys_norm == 0.0 {
        return eps;
    }
    (yk_norm / ys_norm).min(1.0) * eps
}

pub fn scaled_tolerance<T: Scalar>(yk: &Mat<T>, ys: &Mat<T>, eps: f64) -> f64 {
    let ns = two_norm_estimate(ys);
    if ns == 0.0 {
        return eps;
    }
    scaled_tolerance_from_norms(two_norm_estimate(yk), ns, eps)
}

/// Groups columns with identical nonzero-row support.
///
/// Uses the indicator Gram test: with `S` the 0/1 pattern of `ys`,
/// columns `i` and `j` share a pattern iff `(S^T S)_ij = max(nnz_i, nnz_j)`.
/// Groups are listed in order of their first column.
pub fn split_by_sparsity<T: Scalar>(ys: &Mat<T>) -> Vec<Vec<usize>> {
    let words = ys.rows().div_ceil(64);
    let patterns: Vec<Vec<u64>> = (0..ys.cols())
        .map(|j| {
            let mut bits = vec![0u64; words];
            for (i, v) in ys.col(j).iter().enumerate() {
                if *v != T::zero() {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();
    let nnz: Vec<u32> = patterns.iter().map(|p| p.iter().map(|w| w.count_ones()).sum()).collect();
    let mut group_of = vec![usize::MAX; ys.cols()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..ys.cols() {
        if group_of[i] != usize::MAX {
            continue;
        }
        let g = groups.len();
        let mut members = vec![i];
        group_of[i] = g;
        for j in i + 1..ys.cols() {
            if group_of[j] != usize::MAX {
                continue;
            }
            let common: u32 = patterns[i].iter().zip(&patterns[j]).map(|(a, b)| (a & b).count_ones()).sum();
            if common == nnz[i].max(nnz[j]) {
                group_of[j] = g;
                members.push(j);
            }
        }
        groups.push(members);
    }
    groups
}
