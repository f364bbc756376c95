//! The implicit level matrix: kernel entries plus Schur complement deltas.

use std::collections::HashMap;

use crate::geometry::LevelTag;
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// A dense update written onto the skeleton block of one eliminated cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct SciDelta<T> {
    pub ids: Vec<usize>,
    pub block: Mat<T>,
}

/// All deltas written so far, indexed by the DOFs they touch.
#[derive(Clone, Debug, Default)]
pub struct SciStore<T> {
    deltas: Vec<SciDelta<T>>,
    /// Per DOF: (delta id, position of the DOF inside that delta).
    members: Vec<Vec<(u32, u32)>>,
}

impl<T: Scalar> SciStore<T> {
    pub fn new(n: usize) -> Self {
        Self {
            deltas: Vec::new(),
            members: vec![Vec::new(); n],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn delta(&self, id: usize) -> &SciDelta<T> {
        &self.deltas[id]
    }

    pub fn push(&mut self, ids: Vec<usize>, block: Mat<T>) -> usize {
        assert_eq!(block.rows(), ids.len());
        assert_eq!(block.cols(), ids.len());
        let id = self.deltas.len();
        for (pos, &i) in ids.iter().enumerate() {
            self.members[i].push((id as u32, pos as u32));
        }
        self.deltas.push(SciDelta { ids, block });
        id
    }

    /// Deltas containing DOF `i`.
    pub fn deltas_of(&self, i: usize) -> &[(u32, u32)] {
        &self.members[i]
    }

    /// Adds the delta overlay on `(p, q)` into `out`.
    pub fn overlay_into(&self, p: &[usize], q: &[usize], out: &mut Mat<T>) {
        if self.deltas.is_empty() {
            return;
        }
        let mut cols: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
        for (j, &qj) in q.iter().enumerate() {
            for &(did, pos) in &self.members[qj] {
                cols.entry(did).or_default().push((j, pos as usize));
            }
        }
        if cols.is_empty() {
            return;
        }
        for (i, &pi) in p.iter().enumerate() {
            for &(did, pos_i) in &self.members[pi] {
                if let Some(list) = cols.get(&did) {
                    let blk = &self.deltas[did as usize].block;
                    for &(j, pos_j) in list {
                        out[(i, j)] += blk[(pos_i as usize, pos_j)];
                    }
                }
            }
        }
    }

    /// The delta overlay on `(p, q)` alone.
    pub fn overlay(&self, p: &[usize], q: &[usize]) -> Mat<T> {
        let mut out = Mat::zeros(p.len(), q.len());
        self.overlay_into(p, q, &mut out);
        out
    }
}

/// Active DOFs and the delta store of the current level matrix.
#[derive(Clone, Debug)]
pub struct ActiveState<T> {
    /// Sorted active DOF list.
    pub active: Vec<usize>,
    pub is_active: Vec<bool>,
    pub sci: SciStore<T>,
    pub tag: Option<LevelTag>,
}

impl<T: Scalar> ActiveState<T> {
    pub fn new(n: usize) -> Self {
        Self {
            active: (0..n).collect(),
            is_active: vec![true; n],
            sci: SciStore::new(n),
            tag: None,
        }
    }

    pub fn deactivate(&mut self, ids: &[usize]) {
        for &i in ids {
            self.is_active[i] = false;
        }
        let flags = &self.is_active;
        self.active.retain(|&i| flags[i]);
    }
}
