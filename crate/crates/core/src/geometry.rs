//! Uniform grids, tree levels and the cell / face / edge partitions.
//!
//! All partitioning is done in exact integer arithmetic. Coordinates are
//! measured in units of `h/2`, so grid points sit at odd integers and a
//! level with `s = 2^l m` leaf widths per cell has its cell centers at odd
//! multiples of `s` and its face/edge centers at even multiples along the
//! reduced axes.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    /// Spatial dimension, 2 or 3.
    pub d: usize,
    /// Points per axis.
    pub n: usize,
    /// Tree depth.
    pub levels: usize,
    /// Leaf cell width in grid points.
    pub m: usize,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, levels: usize, m: usize) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidSpec(format!("dimension {d} not in {{2, 3}}")));
        }
        if m == 0 || levels >= usize::BITS as usize || n != (1usize << levels) * m {
            return Err(Error::InvalidSpec(format!("n = {n} is not 2^{levels} * {m}")));
        }
        Ok(Self { d, n, levels, m })
    }

    /// Deepest tree whose leaves hold about `occupancy` points
    /// (`m` at least `occupancy^(1/d)` rounded).
    pub fn with_leaf_occupancy(d: usize, n: usize, occupancy: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("n must be positive".into()));
        }
        let target = ((occupancy.max(1) as f64).powf(1.0 / d as f64).round() as usize).max(1);
        let mut levels = 0;
        while n % (1 << (levels + 1)) == 0 && n >> (levels + 1) >= target {
            levels += 1;
        }
        Self::new(d, n, levels, n >> levels)
    }

    /// Default leaf occupancy: 64 points in 2D, 512 in 3D.
    pub fn default_for(d: usize, n: usize) -> Result<Self> {
        Self::with_leaf_occupancy(d, n, if d == 2 { 64 } else { 512 })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn num_points(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Cell width in grid points at integer level `l`.
    pub fn cell_points(&self, l: usize) -> usize {
        (1 << l) * self.m
    }

    /// Cell width at integer level `l`.
    pub fn cell_width(&self, l: usize) -> f64 {
        self.cell_points(l) as f64 * self.h()
    }

    /// Number of cells per axis at level `l`.
    pub fn cells_per_axis(&self, l: usize) -> usize {
        1 << (self.levels - l)
    }
}

/// Collocation points and their element measure.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub d: usize,
    pub h: f64,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn from_coords(d: usize, h: f64, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len() % d, 0);
        Self { d, h, coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// Element measure `h^d`.
    pub fn measure(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    /// Coordinates in units of `h/2`; odd integers for grid points.
    pub fn units(&self, i: usize) -> [i64; 3] {
        let mut u = [0i64; 3];
        for (k, &x) in self.point(i).iter().enumerate() {
            u[k] = (2.0 * x / self.h).round() as i64;
        }
        u
    }

    pub fn dist(&self, i: usize, x: &[f64]) -> f64 {
        self.point(i)
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// `x_j = h (j - 1/2)` per axis, first axis fastest.
pub fn build_uniform_grid(spec: &GridSpec) -> PointSet {
    let n = spec.n;
    let h = spec.h();
    let total = spec.num_points();
    let mut coords = Vec::with_capacity(total * spec.d);
    for idx in 0..total {
        let mut r = idx;
        for _ in 0..spec.d {
            coords.push(h * ((r % n) as f64 + 0.5));
            r /= n;
        }
    }
    PointSet::from_coords(spec.d, h, coords)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClusterKind {
    Cell,
    Face,
    Edge,
}

impl fmt::Display for ClusterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterKind::Cell => "cell",
            ClusterKind::Face => "face",
            ClusterKind::Edge => "edge",
        })
    }
}

/// A disjoint group of active DOFs eliminated together.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub indices: Vec<usize>,
    pub center: Vec<f64>,
    pub width: f64,
    pub kind: ClusterKind,
}

/// Level index `whole + num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelTag {
    pub whole: usize,
    pub num: usize,
    pub den: usize,
}

impl LevelTag {
    pub fn integer(l: usize) -> Self {
        Self {
            whole: l,
            num: 0,
            den: 1,
        }
    }

    pub fn is_fractional(&self) -> bool {
        self.num != 0
    }

    pub fn as_f64(&self) -> f64 {
        self.whole as f64 + self.num as f64 / self.den as f64
    }

    /// Parses `"3"`, `"1/2"`, `"4/3"` and the mixed form `"1+1/3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("bad level tag {s:?}"));
        let s = s.trim();
        let (whole, frac) = match s.split_once('+') {
            Some((w, f)) => (w.trim().parse::<usize>().map_err(|_| bad())?, f.trim()),
            None if s.contains('/') => (0, s),
            None => return Ok(Self::integer(s.parse().map_err(|_| bad())?)),
        };
        let (p, q) = frac.split_once('/').ok_or_else(bad)?;
        let p: usize = p.trim().parse().map_err(|_| bad())?;
        let q: usize = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        let total = whole * q + p;
        let tag = Self {
            whole: total / q,
            num: total % q,
            den: if total % q == 0 { 1 } else { q },
        };
        Ok(tag.reduced())
    }

    fn reduced(self) -> Self {
        if self.num == 0 {
            return Self::integer(self.whole);
        }
        let g = gcd(self.num, self.den);
        Self {
            whole: self.whole,
            num: self.num / g,
            den: self.den / g,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for LevelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "{}", self.whole)
        } else {
            write!(f, "{}/{}", self.whole * self.den + self.num, self.den)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Cells only.
    Rsf,
    /// Cells interleaved with faces (3D) and edges.
    Hifie,
}

/// One elimination pass: which partition to use at which tree level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelSpec {
    pub tag: LevelTag,
    pub kind: ClusterKind,
    /// Integer tree level whose cell width sets the geometry.
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelPlan {
    pub spec: GridSpec,
    pub levels: Vec<LevelSpec>,
}

impl LevelPlan {
    pub fn partition(&self, level: &LevelSpec, points: &PointSet, active: &[usize]) -> Vec<Cluster> {
        partition(&self.spec, points, level.l, level.kind, active)
    }
}

/// Builds the ordered level list, omitting fractional levels in `skip`.
pub fn build_level_plan(spec: &GridSpec, scheme: Scheme, skip: &[LevelTag]) -> Result<LevelPlan> {
    if let Some(t) = skip.iter().find(|t| !t.is_fractional()) {
        return Err(Error::InvalidSpec(format!("skip list may only name fractional levels, got {t}")));
    }
    let mut levels = Vec::new();
    for l in 0..spec.levels {
        levels.push(LevelSpec {
            tag: LevelTag::integer(l),
            kind: ClusterKind::Cell,
            l,
        });
        if scheme == Scheme::Rsf {
            continue;
        }
        let kinds: &[ClusterKind] = if spec.d == 2 {
            &[ClusterKind::Edge]
        } else {
            &[ClusterKind::Face, ClusterKind::Edge]
        };
        let den = kinds.len() + 1;
        for (i, &kind) in kinds.iter().enumerate() {
            let tag = LevelTag {
                whole: l,
                num: i + 1,
                den,
            }
            .reduced();
            if !skip.contains(&tag) {
                levels.push(LevelSpec { tag, kind, l });
            }
        }
    }
    Ok(LevelPlan { spec: *spec, levels })
}

/// Per-axis parity of a center family: `true` means the axis coordinate is
/// an even multiple of `s` (a face or edge normal direction).
fn families(d: usize, kind: ClusterKind) -> Vec<[bool; 3]> {
    let even_count = match kind {
        ClusterKind::Cell => 0,
        ClusterKind::Face => 1,
        ClusterKind::Edge => d - 1,
    };
    let mut out = Vec::new();
    for mask in 0..(1usize << d) {
        if mask.count_ones() as usize != even_count {
            continue;
        }
        let mut fam = [false; 3];
        for (k, f) in fam.iter_mut().enumerate().take(d) {
            *f = mask >> k & 1 == 1;
        }
        out.push(fam);
    }
    // Order families by the position of their even axes, last axis first,
    // matching the enumeration x-normal, y-normal, z-normal.
    out.sort_by_key(|f| {
        let mut key = 0usize;
        for (k, &e) in f.iter().enumerate().take(d) {
            if e {
                key |= 1 << (d - 1 - k);
            }
        }
        std::cmp::Reverse(key)
    });
    out
}

/// Nearest valid multipliers `k` (times `s`) to unit coordinate `x`,
/// either odd in `[1, 2M-1]` or even in `[2, 2M-2]`. Returns one value, or
/// two when `x` is equidistant.
fn axis_candidates(x: i64, s: i64, cells: i64, even: bool) -> Vec<i64> {
    let (lo, hi) = if even { (2, 2 * cells - 2) } else { (1, 2 * cells - 1) };
    if lo > hi {
        return Vec::new();
    }
    // Candidates have the required parity; search the two nearest.
    let base = x.div_euclid(s);
    let mut best: Vec<i64> = Vec::new();
    let mut best_d = i64::MAX;
    for k in [base - 2, base - 1, base, base + 1, base + 2, base + 3] {
        let k = k.clamp(lo, hi);
        if (k % 2 == 0) != even {
            continue;
        }
        let dist = (x - k * s).abs();
        if dist < best_d {
            best_d = dist;
            best.clear();
            best.push(k);
        } else if dist == best_d && !best.contains(&k) {
            best.push(k);
        }
    }
    best.sort_unstable();
    best
}

/// Assigns each active DOF to its nearest center of the given kind at
/// integer level `l`. Empty clusters are omitted.
pub fn partition(spec: &GridSpec, points: &PointSet, l: usize, kind: ClusterKind, active: &[usize]) -> Vec<Cluster> {
    assert!(l < spec.levels.max(1), "level {l} out of range");
    let d = spec.d;
    let s = spec.cell_points(l) as i64;
    let cells = spec.cells_per_axis(l) as i64;
    let fams = families(d, kind);
    // Cluster key: (family index, center multipliers).
    let mut groups: BTreeMap<(usize, [i64; 3]), Vec<usize>> = BTreeMap::new();
    for &i in active {
        let u = points.units(i);
        let mut best: Option<(i64, [i64; 3], usize)> = None;
        for (fi, fam) in fams.iter().enumerate() {
            let cands: Vec<Vec<i64>> = (0..d).map(|a| axis_candidates(u[a], s, cells, fam[a])).collect();
            if cands.iter().any(|c| c.is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; d];
            loop {
                let mut k = [0i64; 3];
                let mut dist = 0i64;
                for a in 0..d {
                    k[a] = cands[a][idx[a]];
                    let diff = u[a] - k[a] * s;
                    dist += diff * diff;
                }
                let better = match &best {
                    None => true,
                    Some((bd, bk, _)) => dist < *bd || (dist == *bd && k[..d] < bk[..d]),
                };
                if better {
                    best = Some((dist, k, fi));
                }
                let mut a = 0;
                while a < d {
                    idx[a] += 1;
                    if idx[a] < cands[a].len() {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                }
                if a == d {
                    break;
                }
            }
        }
        if let Some((_, k, fi)) = best {
            groups.entry((fi, k)).or_default().push(i);
        }
    }
    let h = spec.h();
    let width = spec.cell_width(l);
    let mut out: Vec<(usize, [i64; 3], Cluster)> = groups
        .into_iter()
        .map(|((fi, k), mut indices)| {
            indices.sort_unstable();
            let center = (0..d).map(|a| (k[a] * s) as f64 * h / 2.0).collect();
            (fi, k, Cluster {
                indices,
                center,
                width,
                kind,
            })
        })
        .collect();
    // Within a family, order centers with the first axis fastest.
    out.sort_by(|a, b| {
        let ka: Vec<i64> = a.1[..d].iter().rev().copied().collect();
        let kb: Vec<i64> = b.1[..d].iter().rev().copied().collect();
        (a.0, ka).cmp(&(b.0, kb))
    });
    out.into_iter().map(|t| t.2).collect()
}

pub fn cell_partition(spec: &GridSpec, points: &PointSet, l: usize, active: &[usize]) -> Vec<Cluster> {
    partition(spec, points, l, ClusterKind::Cell, active)
}

pub fn edge_partition(spec: &GridSpec, points: &PointSet, l: usize, active: &[usize]) -> Vec<Cluster> {
    partition(spec, points, l, ClusterKind::Edge, active)
}

pub fn face_partition(spec: &GridSpec, points: &PointSet, l: usize, active: &[usize]) -> Result<Vec<Cluster>> {
    if spec.d != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: spec.d,
        });
    }
    Ok(partition(spec, points, l, ClusterKind::Face, active))
}

/// All centers of a kind at level `l`, in partition order.
pub fn centers(spec: &GridSpec, l: usize, kind: ClusterKind) -> Vec<Vec<f64>> {
    let d = spec.d;
    let s = spec.cell_points(l) as i64;
    let cells = spec.cells_per_axis(l) as i64;
    let h = spec.h();
    let mut out = Vec::new();
    for fam in families(d, kind) {
        let ranges: Vec<Vec<i64>> = (0..d)
            .map(|a| {
                if fam[a] {
                    (1..cells).map(|j| 2 * j).collect()
                } else {
                    (1..=cells).map(|j| 2 * j - 1).collect()
                }
            })
            .collect();
        let total: usize = ranges.iter().map(|r| r.len()).product();
        for mut r in 0..total {
            let mut c = Vec::with_capacity(d);
            for rg in &ranges {
                c.push((rg[r % rg.len()] * s) as f64 * h / 2.0);
                r /= rg.len();
            }
            out.push(c);
        }
    }
    out
}
